//! Independent reference propagator used by the integration tests.
//!
//! Amplitudes live in a sparse map over the unbounded lattice and every
//! plate is applied straight from its action on basis states, with plain
//! `cos`/`sin`, so nothing is shared with the matrix code under test.

#![allow(dead_code)]

pub mod corpus;

use std::collections::BTreeMap;

use num_complex::Complex64;
use qwalk_core::{PlateOp, Protocol, Site};
use rand::Rng;

/// `(m, n, coin)` with coin 0 = Up, 1 = Down.
pub type Key = (i32, i32, usize);
pub type Amp = BTreeMap<Key, Complex64>;
/// Probability per unordered pair of sites.
pub type PairMap = BTreeMap<((i32, i32), (i32, i32)), f64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn localized(site: Site, up: Complex64, down: Complex64) -> Amp {
    let mut a = Amp::new();
    a.insert((site.m, site.n, 0), up);
    a.insert((site.m, site.n, 1), down);
    a
}

fn add(out: &mut Amp, k: Key, v: Complex64) {
    *out.entry(k).or_insert(Complex64::new(0.0, 0.0)) += v;
}

pub fn plate(psi: &Amp, op: &PlateOp) -> Amp {
    let mut out = Amp::new();
    match *op {
        PlateOp::Coin(w) => {
            let (c, s) = (w.cos(), w.sin());
            for (&(m, n, coin), &a) in psi {
                // C = [[cos, i sin], [i sin, cos]]
                add(&mut out, (m, n, coin), a * c);
                add(&mut out, (m, n, 1 - coin), a * I * s);
            }
        }
        PlateOp::ShiftX(d) | PlateOp::ShiftY(d) => {
            let (c, s) = ((d / 2.0).cos(), (d / 2.0).sin());
            let (dm, dn) = if matches!(op, PlateOp::ShiftX(_)) {
                (1, 0)
            } else {
                (0, 1)
            };
            for (&(m, n, coin), &a) in psi {
                add(&mut out, (m, n, coin), a * c);
                // Up hops forward and turns Down; Down hops back and turns Up.
                let (tm, tn) = if coin == 0 {
                    (m + dm, n + dn)
                } else {
                    (m - dm, n - dn)
                };
                add(&mut out, (tm, tn, 1 - coin), a * I * s);
            }
        }
    }
    out
}

pub fn walk(psi: &Amp, protocol: &Protocol, steps: usize) -> Amp {
    let mut cur = psi.clone();
    for t in 0..steps {
        for op in protocol.segment_for_step(t) {
            cur = plate(&cur, op);
        }
    }
    cur
}

pub fn positions(psi: &Amp) -> BTreeMap<(i32, i32), f64> {
    let mut out = BTreeMap::new();
    for (&(m, n, _), a) in psi {
        *out.entry((m, n)).or_insert(0.0) += a.norm_sqr();
    }
    out
}

pub fn amp(psi: &Amp, k: Key) -> Complex64 {
    psi.get(&k).copied().unwrap_or_default()
}

/// Two-photon probabilities over unordered site pairs, built from the
/// permanents of the 2 × 2 submatrices of the single-photon propagator
/// columns `a`, `b`; a doubly occupied mode picks up `1/2!`.
pub fn two_photon_positions(a: &Amp, b: &Amp, c0: f64) -> PairMap {
    let mut keys: Vec<Key> = a.keys().chain(b.keys()).copied().collect();
    keys.sort();
    keys.dedup();
    let mut ind = Vec::new();
    let mut dis = Vec::new();
    for (x, &k) in keys.iter().enumerate() {
        for &l in &keys[x..] {
            let (ak, al, bk, bl) = (amp(a, k), amp(a, l), amp(b, k), amp(b, l));
            let perm = ak * bl + al * bk;
            let classical = ak.norm_sqr() * bl.norm_sqr() + al.norm_sqr() * bk.norm_sqr();
            if k == l {
                ind.push((k, l, perm.norm_sqr() / 2.0));
                dis.push(classical / 2.0);
            } else {
                ind.push((k, l, perm.norm_sqr()));
                dis.push(classical);
            }
        }
    }
    let z: f64 = ind.iter().map(|e| e.2).sum();
    let mut out = PairMap::new();
    for ((k, l, pi), pd) in ind.into_iter().zip(dis) {
        let p = c0 * pi / z + (1.0 - c0) * pd;
        let (s1, s2) = ((k.0, k.1), (l.0, l.1));
        let key = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        *out.entry(key).or_insert(0.0) += p;
    }
    out
}

/// Orders sites the way the crate does, by `(n, m)`.
pub fn site_key(s: (i32, i32)) -> (i32, i32) {
    (s.1, s.0)
}

pub fn random_plate<R: Rng>(rng: &mut R) -> PlateOp {
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    match rng.random_range(0..3) {
        0 => PlateOp::coin(angle).unwrap(),
        1 => PlateOp::shift_x(angle).unwrap(),
        _ => PlateOp::shift_y(angle).unwrap(),
    }
}

/// One-step protocol of `1..=max_plates` random plates.
pub fn random_protocol<R: Rng>(rng: &mut R, max_plates: usize) -> Protocol {
    let n = rng.random_range(1..=max_plates);
    Protocol::single_step((0..n).map(|_| random_plate(rng)).collect()).unwrap()
}

/// Random normalized coin amplitudes.
pub fn random_coin<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    let theta = rng.random_range(0.0..std::f64::consts::PI);
    let (p1, p2) = (
        rng.random_range(0.0..std::f64::consts::TAU),
        rng.random_range(0.0..std::f64::consts::TAU),
    );
    (
        Complex64::from_polar((theta / 2.0).cos(), p1),
        Complex64::from_polar((theta / 2.0).sin(), p2),
    )
}
