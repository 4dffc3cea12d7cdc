//! Independent reference implementations used by the integration tests.
//! Nothing here calls into the library's field, coding or protocol code.

#![allow(dead_code)]

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shift-and-add multiplication modulo x^8 + x^4 + x^3 + x + 1.
pub fn slow_mul(mut a: u8, mut b: u8) -> u8 {
    let mut p = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            p ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= 0x1B;
        }
        b >>= 1;
    }
    p
}

/// Brute-force inverse.
pub fn slow_inv(a: u8) -> u8 {
    (1..=255u8).find(|&b| slow_mul(a, b) == 1).expect("nonzero element")
}

/// Rank of `rows` by Gaussian elimination from scratch.
pub fn dense_rank(rows: &[Vec<u8>]) -> usize {
    let mut m: Vec<Vec<u8>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let inv = slow_inv(m[rank][c]);
        for x in m[rank].iter_mut() {
            *x = slow_mul(*x, inv);
        }
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let f = m[r][c];
                for k in 0..cols {
                    let v = slow_mul(f, m[rank][k]);
                    m[r][k] ^= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Solves `A x = y` for a system with full column rank; rows are
/// `(coefficients, payload)`.
pub fn dense_solve(rows: &[(Vec<u8>, Vec<u8>)], unknowns: usize) -> Option<Vec<Vec<u8>>> {
    let mut m: Vec<(Vec<u8>, Vec<u8>)> = rows.to_vec();
    for c in 0..unknowns {
        let p = (c..m.len()).find(|&r| m[r].0[c] != 0)?;
        m.swap(c, p);
        let inv = slow_inv(m[c].0[c]);
        let (coeffs, payload) = &mut m[c];
        for x in coeffs.iter_mut().chain(payload.iter_mut()) {
            *x = slow_mul(*x, inv);
        }
        for r in 0..m.len() {
            if r != c && m[r].0[c] != 0 {
                let f = m[r].0[c];
                let (pc, pp) = (m[c].0.clone(), m[c].1.clone());
                for (x, y) in m[r].0.iter_mut().zip(&pc) {
                    *x ^= slow_mul(f, *y);
                }
                for (x, y) in m[r].1.iter_mut().zip(&pp) {
                    *x ^= slow_mul(f, *y);
                }
            }
        }
    }
    Some(m.into_iter().take(unknowns).map(|(_, p)| p).collect())
}

fn mix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chacha(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRun {
    pub slots: [u64; 3],
    pub queues: [usize; 2],
    pub delivered: bool,
}

/// Straight-line version of the three-phase protocol: whole-vector rank
/// checks, no compact coordinates, no shared state between phases beyond
/// plain vectors.
pub fn reference_simulate(
    (dn, ds, dd): (f64, f64, f64),
    m: usize,
    payload_len: usize,
    seed: u64,
    generation_size: usize,
) -> ReferenceRun {
    let mut payload_rng = chacha(seed, 1);
    let mut data = [vec![vec![0u8; payload_len]; m], vec![vec![0u8; payload_len]; m]];
    for user in data.iter_mut() {
        for p in user.iter_mut() {
            payload_rng.fill_bytes(p);
        }
    }

    let mut ch = chacha(seed, 0);
    let mut slot = |d1: f64, d2: f64| {
        let u1: f64 = ch.random();
        let u2: f64 = ch.random();
        (u1 < 1.0 - d1, u2 < 1.0 - d2)
    };

    // got[r][u][i]: receiver r holds packet i of user u.
    let mut got = [[vec![false; m], vec![false; m]], [vec![false; m], vec![false; m]]];
    let mut queues: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    let mut slots = [0u64; 3];

    for user in 0..2 {
        let (d1, d2) = if user == 0 { (dd, dn) } else { (dn, dd) };
        for i in 0..m {
            loop {
                let s = slot(d1, d2);
                slots[user] += 1;
                if s.0 {
                    got[0][user][i] = true;
                }
                if s.1 {
                    got[1][user][i] = true;
                }
                let (own, other) = if user == 0 { (s.0, s.1) } else { (s.1, s.0) };
                if own {
                    break;
                }
                if other {
                    queues[user].push(i);
                    break;
                }
            }
        }
    }

    let k = queues[0].len().max(queues[1].len());
    let combined: Vec<Vec<u8>> = (0..k)
        .map(|j| {
            let mut x = vec![0u8; payload_len];
            for u in 0..2 {
                if let Some(&i) = queues[u].get(j) {
                    for (a, b) in x.iter_mut().zip(&data[u][i]) {
                        *a ^= b;
                    }
                }
            }
            x
        })
        .collect();

    let mut recovered: [Vec<Option<Vec<u8>>>; 2] = [vec![None; k], vec![None; k]];
    let mut g = 0u64;
    let mut start = 0;
    while start < k {
        let len = generation_size.min(k - start);
        let block_seed = mix(seed ^ mix(g));
        // Receiver r already knows entry j when it is a bare packet of the
        // other user's longer queue, which it overheard.
        let mut rows: [Vec<(Vec<u8>, Vec<u8>)>; 2] = [Vec::new(), Vec::new()];
        for r in 0..2 {
            let other = 1 - r;
            for j in 0..len {
                let idx = start + j;
                if idx >= queues[r].len() && idx < queues[other].len() {
                    let mut unit = vec![0u8; len];
                    unit[j] = 1;
                    let pkt = queues[other][idx];
                    assert!(got[r][other][pkt]);
                    rows[r].push((unit, data[other][pkt].clone()));
                }
            }
        }
        let full = |rows: &Vec<(Vec<u8>, Vec<u8>)>| {
            let coeffs: Vec<Vec<u8>> = rows.iter().map(|(c, _)| c.clone()).collect();
            !coeffs.is_empty() && dense_rank(&coeffs) == len
        };
        let mut done = [full(&rows[0]), full(&rows[1])];
        let mut index = 0u64;
        while !(done[0] && done[1]) {
            let s = slot(ds, ds);
            slots[2] += 1;
            let wants = [s.0 && !done[0], s.1 && !done[1]];
            if wants[0] || wants[1] {
                let coeffs = if (index as usize) < len {
                    let mut unit = vec![0u8; len];
                    unit[index as usize] = 1;
                    unit
                } else {
                    let mut c = vec![0u8; len];
                    chacha(mix(block_seed ^ mix(index)), 2).fill_bytes(&mut c);
                    c
                };
                let mut payload = vec![0u8; payload_len];
                for (j, &c) in coeffs.iter().enumerate() {
                    for (a, b) in payload.iter_mut().zip(&combined[start + j]) {
                        *a ^= slow_mul(c, *b);
                    }
                }
                for r in 0..2 {
                    if wants[r] {
                        rows[r].push((coeffs.clone(), payload.clone()));
                        done[r] = full(&rows[r]);
                    }
                }
            }
            index += 1;
        }
        for r in 0..2 {
            let x = dense_solve(&rows[r], len).expect("full rank");
            for (j, v) in x.into_iter().enumerate() {
                recovered[r][start + j] = Some(v);
            }
        }
        g += 1;
        start += len;
    }

    let mut delivered = true;
    for r in 0..2 {
        let other = 1 - r;
        for (j, &i) in queues[r].iter().enumerate() {
            let mut x = recovered[r][j].clone().expect("decoded");
            if let Some(&side) = queues[other].get(j) {
                assert!(got[r][other][side]);
                for (a, b) in x.iter_mut().zip(&data[other][side]) {
                    *a ^= b;
                }
            }
            delivered &= x == data[r][i];
            got[r][r][i] = true;
        }
        delivered &= got[r][r].iter().all(|&b| b);
    }

    ReferenceRun {
        slots,
        queues: [queues[0].len(), queues[1].len()],
        delivered,
    }
}
