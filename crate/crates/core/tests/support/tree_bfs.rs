//! Breadth-first lattice-class distance in the tree of Z_p-lattices.
//!
//! A class is keyed by its Hermite form `[[p^a, X], [0, 1]]`, with `X` taken
//! modulo `p^a Z_p` and stored as `p^e * r`, where `r` is a unit residue mod
//! `p^(a-e)`. All arithmetic is on `i128`, which is enough for the distances
//! exercised here (under 20 for p = 5).

use std::collections::{HashMap, HashSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Key {
    a: i64,
    x: Option<(i64, i128)>,
}

fn vp(mut x: i128, p: i128) -> i64 {
    assert!(x != 0);
    let mut k = 0;
    while x % p == 0 {
        x /= p;
        k += 1;
    }
    k
}

fn pow(p: i128, e: i64) -> i128 {
    p.checked_pow(e as u32).expect("i128 overflow")
}

fn inv_mod(u: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (u.rem_euclid(m), m);
    let (mut s0, mut s1) = (1i128, 0i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert_eq!(r0, 1, "not a unit");
    s0.rem_euclid(m)
}

/// Class of the lattice spanned by the columns `(m[0], m[2])`, `(m[1], m[3])`.
pub fn canon(m: [i128; 4], p: i128) -> Key {
    let [a, b, c, d] = m;
    let det = a.checked_mul(d).unwrap() - b.checked_mul(c).unwrap();
    assert!(det != 0, "singular basis");
    let (x, y) = if c != 0 && (d == 0 || vp(c, p) <= vp(d, p)) { (a, c) } else { (b, d) };
    let beta = vp(y, p);
    let unit = y / pow(p, beta);
    let ka = vp(det, p) - 2 * beta;
    if x == 0 {
        return Key { a: ka, x: None };
    }
    let vx = vp(x, p);
    let e = vx - beta;
    if e >= ka {
        return Key { a: ka, x: None };
    }
    let modulus = pow(p, ka - e);
    let xu = (x / pow(p, vx)).rem_euclid(modulus);
    let r = xu * inv_mod(unit, modulus) % modulus;
    Key { a: ka, x: Some((e, r)) }
}

fn basis(k: Key, p: i128) -> [i128; 4] {
    let e = k.x.map_or(0, |(e, _)| e);
    let s = 0.max(-k.a).max(-e);
    let top = match k.x {
        Some((e, r)) => pow(p, e + s) * r,
        None => 0,
    };
    [pow(p, k.a + s), top, 0, pow(p, s)]
}

pub fn neighbors(k: Key, p: i128) -> Vec<Key> {
    let [a, b, c, d] = basis(k, p);
    let mut out: Vec<Key> = (0..p)
        .map(|j| canon([p * a, b + j * a, p * c, d + j * c], p))
        .collect();
    out.push(canon([a, p * b, c, p * d], p));
    out
}

pub fn origin() -> Key {
    Key { a: 0, x: None }
}

/// Classes within `radius` of the origin, with their depth.
pub fn ball(p: i128, radius: u32) -> HashMap<Key, u32> {
    let mut seen = HashMap::from([(origin(), 0)]);
    let mut front = vec![origin()];
    for depth in 1..=radius {
        let mut next = Vec::new();
        for k in front {
            for n in neighbors(k, p) {
                if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(n) {
                    e.insert(depth);
                    next.push(n);
                }
            }
        }
        front = next;
    }
    seen
}

/// Distance from `start` to the origin: grow a search from `start` until it
/// meets the precomputed ball.
pub fn distance(start: Key, p: i128, ball: &HashMap<Key, u32>) -> u32 {
    let mut seen = HashSet::from([start]);
    let mut front = vec![start];
    for level in 0.. {
        let hit = front.iter().filter_map(|k| ball.get(k)).min();
        if let Some(d) = hit {
            return level + d;
        }
        let mut next = Vec::new();
        for k in front {
            for n in neighbors(k, p) {
                if seen.insert(n) {
                    next.push(n);
                }
            }
        }
        front = next;
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_sizes() {
        for p in [2i128, 3, 5] {
            let b = ball(p, 4);
            for r in 1..=4u32 {
                let n = b.values().filter(|&&d| d == r).count() as i128;
                assert_eq!(n, (p + 1) * p.pow(r - 1));
            }
        }
    }
}
