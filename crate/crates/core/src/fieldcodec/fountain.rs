//! Systematic random-linear fountain code over GF(2^8).
//!
//! Symbol `i < K` of a block is source packet `i` sent uncoded. Every later
//! symbol is a repair row whose coefficients are a pure function of the block
//! seed and the symbol index, so they never travel in a header.

use rand::RngCore;

use super::gf;
use crate::error::{Error, Result};
use crate::rng;

/// Coefficients of repair row `index` for a block of `len` sources.
pub fn repair_coefficients(seed: u64, index: u64, len: usize) -> Vec<u8> {
    let mut coeffs = vec![0u8; len];
    let key = rng::splitmix64(seed ^ rng::splitmix64(index));
    rng::stream_rng(key, rng::COEFFICIENT_STREAM).fill_bytes(&mut coeffs);
    coeffs
}

/// `sum_i coeffs[i] * sources[i]`.
pub fn encode_repair<S: AsRef<[u8]>>(sources: &[S], coeffs: &[u8]) -> Result<Vec<u8>> {
    let first = sources.first().ok_or(Error::EmptySources)?;
    if coeffs.len() != sources.len() {
        return Err(Error::LengthMismatch {
            expected: sources.len(),
            actual: coeffs.len(),
        });
    }
    let len = first.as_ref().len();
    let mut out = vec![0u8; len];
    for (src, &c) in sources.iter().zip(coeffs) {
        let src = src.as_ref();
        if src.len() != len {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: src.len(),
            });
        }
        gf::mul_add_assign(&mut out, src, c);
    }
    Ok(out)
}

/// Emits the symbol stream for one block of equal-length sources.
#[derive(Debug, Clone)]
pub struct FountainEncoder<S> {
    sources: Vec<S>,
    seed: u64,
}

impl<S: AsRef<[u8]>> FountainEncoder<S> {
    pub fn new(sources: Vec<S>, seed: u64) -> Result<Self> {
        let first = sources.first().ok_or(Error::EmptySources)?;
        let len = first.as_ref().len();
        if let Some(bad) = sources.iter().find(|s| s.as_ref().len() != len) {
            return Err(Error::LengthMismatch {
                expected: len,
                actual: bad.as_ref().len(),
            });
        }
        Ok(FountainEncoder { sources, seed })
    }

    pub fn block_len(&self) -> usize {
        self.sources.len()
    }

    pub fn coefficients(&self, index: u64) -> Vec<u8> {
        let k = self.sources.len();
        if (index as usize) < k {
            let mut unit = vec![0u8; k];
            unit[index as usize] = 1;
            unit
        } else {
            repair_coefficients(self.seed, index, k)
        }
    }

    /// Coefficient vector and payload of symbol `index`.
    pub fn symbol(&self, index: u64) -> (Vec<u8>, Vec<u8>) {
        let coeffs = self.coefficients(index);
        let payload = if (index as usize) < self.sources.len() {
            self.sources[index as usize].as_ref().to_vec()
        } else {
            encode_repair(&self.sources, &coeffs).expect("validated at construction")
        };
        (coeffs, payload)
    }
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<u8>,
    payload: Vec<u8>,
}

/// Incremental Gaussian elimination. Stored rows stay in row-echelon form:
/// the row for pivot column `c` is zero before `c` and has a 1 at `c`.
#[derive(Debug, Clone)]
pub struct Decoder {
    dimension: usize,
    payload_len: usize,
    rows: Vec<Row>,
    pivot_row: Vec<Option<usize>>,
}

impl Decoder {
    pub fn new(dimension: usize, payload_len: usize) -> Self {
        Decoder {
            dimension,
            payload_len,
            rows: Vec::with_capacity(dimension),
            pivot_row: vec![None; dimension],
        }
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.dimension
    }

    /// Reduces `(coeffs, payload)` against the stored rows and keeps it if it
    /// is innovative. Returns the rank afterwards.
    pub fn insert(&mut self, coeffs: &[u8], payload: &[u8]) -> Result<usize> {
        self.insert_owned(coeffs.to_vec(), payload.to_vec())
    }

    pub fn insert_owned(&mut self, mut coeffs: Vec<u8>, mut payload: Vec<u8>) -> Result<usize> {
        if coeffs.len() != self.dimension {
            return Err(Error::LengthMismatch {
                expected: self.dimension,
                actual: coeffs.len(),
            });
        }
        if payload.len() != self.payload_len {
            return Err(Error::LengthMismatch {
                expected: self.payload_len,
                actual: payload.len(),
            });
        }
        if self.is_complete() {
            return Ok(self.rank());
        }
        for col in 0..self.dimension {
            let f = coeffs[col];
            if f == 0 {
                continue;
            }
            match self.pivot_row[col] {
                Some(r) => {
                    let row = &self.rows[r];
                    gf::mul_add_assign(&mut coeffs[col..], &row.coeffs[col..], f);
                    gf::mul_add_assign(&mut payload, &row.payload, f);
                }
                None => {
                    let scale = gf::inv(f)?;
                    gf::scale_assign(&mut coeffs[col..], scale);
                    gf::scale_assign(&mut payload, scale);
                    self.pivot_row[col] = Some(self.rows.len());
                    self.rows.push(Row { coeffs, payload });
                    break;
                }
            }
        }
        Ok(self.rank())
    }

    /// Back-substitutes to recover all `dimension` source payloads.
    pub fn solve(&self) -> Result<Vec<Vec<u8>>> {
        if !self.is_complete() {
            return Err(Error::RankDeficient {
                rank: self.rank(),
                dimension: self.dimension,
            });
        }
        let mut out: Vec<Vec<u8>> = vec![Vec::new(); self.dimension];
        for col in (0..self.dimension).rev() {
            let row = &self.rows[self.pivot_row[col].expect("full rank")];
            let mut x = row.payload.clone();
            for (j, &c) in row.coeffs.iter().enumerate().skip(col + 1) {
                gf::mul_add_assign(&mut x, &out[j], c);
            }
            out[col] = x;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sources(rng: &mut impl Rng, k: usize, len: usize) -> Vec<Vec<u8>> {
        (0..k)
            .map(|_| (0..len).map(|_| rng.random()).collect())
            .collect()
    }

    // Second, scalar implementation of the linear combination.
    fn scalar_combination(sources: &[Vec<u8>], coeffs: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; sources[0].len()];
        for (b, o) in out.iter_mut().enumerate() {
            for (src, &c) in sources.iter().zip(coeffs) {
                *o ^= gf::gf_arith(c, src[b], gf::GfOp::Mul).unwrap();
            }
        }
        out
    }

    #[test]
    fn encode_unit_and_pair() {
        let sources = vec![vec![1u8, 2, 3], vec![4, 5, 6], vec![7, 8, 9]];
        assert_eq!(encode_repair(&sources, &[0, 1, 0]).unwrap(), sources[1]);
        let two = &sources[..2];
        assert_eq!(encode_repair(two, &[1, 1]).unwrap(), vec![5, 7, 5]);
    }

    #[test]
    fn encode_errors() {
        let empty: Vec<Vec<u8>> = Vec::new();
        assert_eq!(encode_repair(&empty, &[]), Err(Error::EmptySources));
        assert!(encode_repair(&[vec![1u8]], &[1, 2]).is_err());
        assert!(encode_repair(&[vec![1u8], vec![1, 2]], &[1, 2]).is_err());
    }

    #[test]
    fn encode_matches_scalar_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let sources = random_sources(&mut rng, 4, 32);
            let coeffs: Vec<u8> = (0..4).map(|_| rng.random()).collect();
            assert_eq!(
                encode_repair(&sources, &coeffs).unwrap(),
                scalar_combination(&sources, &coeffs)
            );
        }
    }

    #[test]
    fn duplicate_row_counts_once() {
        let mut d = Decoder::new(4, 2);
        assert_eq!(d.insert(&[1, 2, 3, 4], &[9, 9]).unwrap(), 1);
        assert_eq!(d.insert(&[1, 2, 3, 4], &[9, 9]).unwrap(), 1);
        assert_eq!(d.insert(&[2, 4, 6, 8], &[mul2(9), mul2(9)]).unwrap(), 1);
    }

    fn mul2(x: u8) -> u8 {
        gf::mul(2, x)
    }

    #[test]
    fn unit_rows_reach_full_rank_and_solve_verbatim() {
        let sources = vec![vec![10u8, 11], vec![20, 21], vec![30, 31]];
        let enc = FountainEncoder::new(sources.clone(), 1).unwrap();
        let mut d = Decoder::new(3, 2);
        for i in 0..3 {
            let (c, p) = enc.symbol(i);
            assert_eq!(d.insert(&c, &p).unwrap(), i as usize + 1);
        }
        assert_eq!(d.solve().unwrap(), sources);
    }

    #[test]
    fn solve_rank_deficient() {
        let mut d = Decoder::new(3, 1);
        d.insert(&[1, 0, 0], &[1]).unwrap();
        d.insert(&[0, 1, 0], &[1]).unwrap();
        assert_eq!(
            d.solve(),
            Err(Error::RankDeficient { rank: 2, dimension: 3 })
        );
    }

    #[test]
    fn insert_length_checks() {
        let mut d = Decoder::new(3, 2);
        assert!(d.insert(&[1, 0], &[1, 1]).is_err());
        assert!(d.insert(&[1, 0, 0], &[1]).is_err());
        assert_eq!(d.rank(), 0);
    }

    #[test]
    fn random_full_rank_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sources = random_sources(&mut rng, 8, 64);
        let enc = FountainEncoder::new(sources.clone(), 77).unwrap();
        let mut d = Decoder::new(8, 64);
        let mut index = 8u64; // repair rows only
        while !d.is_complete() {
            let (c, p) = enc.symbol(index);
            d.insert(&c, &p).unwrap();
            index += 1;
        }
        assert_eq!(d.solve().unwrap(), sources);
    }

    #[test]
    fn repair_coefficients_are_reproducible() {
        assert_eq!(repair_coefficients(5, 100, 16), repair_coefficients(5, 100, 16));
        assert_ne!(repair_coefficients(5, 100, 16), repair_coefficients(5, 101, 16));
        assert_eq!(repair_coefficients(5, 100, 16)[..8], repair_coefficients(5, 100, 8)[..]);
    }

    #[test]
    fn k_plus_three_rows_decode() {
        let k = 32;
        let trials = 10_000;
        let mut failures = 0;
        for t in 0..trials {
            let mut d = Decoder::new(k, 1);
            for i in 0..(k + 3) as u64 {
                let c = repair_coefficients(t, i, k);
                d.insert(&c, &[0]).unwrap();
            }
            if !d.is_complete() {
                failures += 1;
            }
        }
        assert!((failures as f64) < 0.001 * trials as f64, "{failures} failures");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_under_erasures(
            k in 1usize..=64,
            erasure in 0.0f64..0.9,
            seed in any::<u64>(),
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sources = random_sources(&mut rng, k, 16);
            let enc = FountainEncoder::new(sources.clone(), seed).unwrap();
            let mut d = Decoder::new(k, 16);
            let mut index = 0u64;
            while !d.is_complete() {
                if rng.random::<f64>() >= erasure {
                    let (c, p) = enc.symbol(index);
                    d.insert(&c, &p).unwrap();
                }
                index += 1;
            }
            prop_assert_eq!(d.solve().unwrap(), sources);
        }
    }
}
