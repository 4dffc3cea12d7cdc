//! GF(2^8) with reduction polynomial x^8 + x^4 + x^3 + x + 1 (0x11B).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign};

use crate::error::{Error, Result};

const POLY: u16 = 0x11B;
const GENERATOR: u8 = 0x03;

const fn xtime_mul(mut a: u8, mut b: u8) -> u8 {
    let mut acc = 0u8;
    while b != 0 {
        if b & 1 != 0 {
            acc ^= a;
        }
        let carry = a & 0x80 != 0;
        a <<= 1;
        if carry {
            a ^= (POLY & 0xFF) as u8;
        }
        b >>= 1;
    }
    acc
}

const fn build_exp_log() -> ([u8; 512], [u8; 256]) {
    let mut exp = [0u8; 512];
    let mut log = [0u8; 256];
    let mut x = 1u8;
    let mut i = 0;
    while i < 255 {
        exp[i] = x;
        exp[i + 255] = x;
        log[x as usize] = i as u8;
        x = xtime_mul(x, GENERATOR);
        i += 1;
    }
    exp[510] = exp[0];
    exp[511] = exp[1];
    (exp, log)
}

const EXP_LOG: ([u8; 512], [u8; 256]) = build_exp_log();
const EXP: [u8; 512] = EXP_LOG.0;
const LOG: [u8; 256] = EXP_LOG.1;

const fn build_mul_table() -> [[u8; 256]; 256] {
    let mut t = [[0u8; 256]; 256];
    let mut a = 1;
    while a < 256 {
        let mut b = 1;
        while b < 256 {
            t[a][b] = EXP[LOG[a] as usize + LOG[b] as usize];
            b += 1;
        }
        a += 1;
    }
    t
}

static MUL: [[u8; 256]; 256] = build_mul_table();

/// A field element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Gf256(pub u8);

impl Gf256 {
    pub const ZERO: Gf256 = Gf256(0);
    pub const ONE: Gf256 = Gf256(1);

    pub fn inv(self) -> Result<Gf256> {
        if self.0 == 0 {
            return Err(Error::InverseOfZero);
        }
        Ok(Gf256(EXP[255 - LOG[self.0 as usize] as usize]))
    }
}

impl fmt::Debug for Gf256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf256({:#04x})", self.0)
    }
}

impl Add for Gf256 {
    type Output = Gf256;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn add(self, rhs: Gf256) -> Gf256 {
        Gf256(self.0 ^ rhs.0)
    }
}

impl AddAssign for Gf256 {
    fn add_assign(&mut self, rhs: Gf256) {
        self.0 ^= rhs.0;
    }
}

impl Mul for Gf256 {
    type Output = Gf256;
    fn mul(self, rhs: Gf256) -> Gf256 {
        Gf256(mul(self.0, rhs.0))
    }
}

impl MulAssign for Gf256 {
    fn mul_assign(&mut self, rhs: Gf256) {
        *self = *self * rhs;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GfOp {
    Add,
    Mul,
    Inv,
}

/// Applies `op` to `a` (and `b` for the binary operations).
pub fn gf_arith(a: u8, b: u8, op: GfOp) -> Result<u8> {
    match op {
        GfOp::Add => Ok(a ^ b),
        GfOp::Mul => Ok(mul(a, b)),
        GfOp::Inv => Gf256(a).inv().map(|x| x.0),
    }
}

#[inline]
pub fn mul(a: u8, b: u8) -> u8 {
    MUL[a as usize][b as usize]
}

pub fn inv(a: u8) -> Result<u8> {
    Gf256(a).inv().map(|x| x.0)
}

/// `dst += c * src`, element-wise.
#[inline]
pub fn mul_add_assign(dst: &mut [u8], src: &[u8], c: u8) {
    debug_assert_eq!(dst.len(), src.len());
    match c {
        0 => {}
        1 => add_assign(dst, src),
        _ => {
            let row = &MUL[c as usize];
            for (d, s) in dst.iter_mut().zip(src) {
                *d ^= row[*s as usize];
            }
        }
    }
}

#[inline]
pub fn add_assign(dst: &mut [u8], src: &[u8]) {
    debug_assert_eq!(dst.len(), src.len());
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub fn scale_assign(dst: &mut [u8], c: u8) {
    if c == 1 {
        return;
    }
    let row = &MUL[c as usize];
    for d in dst.iter_mut() {
        *d = row[*d as usize];
    }
}
