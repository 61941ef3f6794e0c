//! Jacobian-coordinate arithmetic on `y² = x³ + ax + b` over a prime field.

use crate::arith::{add_mod, mul_mod, sub_mod};

#[derive(Debug, Clone, Copy)]
pub(crate) struct ShortCurve {
    pub a: u64,
    pub b: u64,
    pub p: u64,
}

/// `(X : Y : Z)` with `x = X/Z²`, `y = Y/Z³`; `Z = 0` is the point at infinity.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Jacobian {
    x: u64,
    y: u64,
    z: u64,
}

impl Jacobian {
    pub const INFINITY: Jacobian = Jacobian { x: 1, y: 1, z: 0 };

    pub fn affine(x: u64, y: u64) -> Self {
        Jacobian { x, y, z: 1 }
    }

    pub fn is_infinity(&self) -> bool {
        self.z == 0
    }
}

impl ShortCurve {
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.p)
    }
    #[inline]
    fn add(&self, a: u64, b: u64) -> u64 {
        add_mod(a, b, self.p)
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        sub_mod(a, b, self.p)
    }

    /// `x³ + ax + b`.
    pub fn rhs(&self, x: u64) -> u64 {
        let x2 = self.mul(x, x);
        self.add(self.mul(self.add(x2, self.a), x), self.b)
    }

    pub fn neg(&self, pt: Jacobian) -> Jacobian {
        Jacobian {
            y: self.sub(0, pt.y),
            ..pt
        }
    }

    pub fn eq(&self, lhs: Jacobian, rhs: Jacobian) -> bool {
        match (lhs.is_infinity(), rhs.is_infinity()) {
            (true, true) => return true,
            (false, false) => {}
            _ => return false,
        }
        let z1z1 = self.mul(lhs.z, lhs.z);
        let z2z2 = self.mul(rhs.z, rhs.z);
        self.mul(lhs.x, z2z2) == self.mul(rhs.x, z1z1)
            && self.mul(lhs.y, self.mul(z2z2, rhs.z)) == self.mul(rhs.y, self.mul(z1z1, lhs.z))
    }

    pub fn double(&self, pt: Jacobian) -> Jacobian {
        if pt.is_infinity() || pt.y == 0 {
            return Jacobian::INFINITY;
        }
        let xx = self.mul(pt.x, pt.x);
        let yy = self.mul(pt.y, pt.y);
        let yyyy = self.mul(yy, yy);
        let zz = self.mul(pt.z, pt.z);
        let s = self.mul(4 % self.p, self.mul(pt.x, yy));
        let m = self.add(self.mul(3, xx), self.mul(self.a, self.mul(zz, zz)));
        let x3 = self.sub(self.mul(m, m), self.add(s, s));
        let y3 = self.sub(self.mul(m, self.sub(s, x3)), self.mul(8, yyyy));
        let z3 = self.mul(2, self.mul(pt.y, pt.z));
        Jacobian { x: x3, y: y3, z: z3 }
    }

    pub fn add_points(&self, lhs: Jacobian, rhs: Jacobian) -> Jacobian {
        if lhs.is_infinity() {
            return rhs;
        }
        if rhs.is_infinity() {
            return lhs;
        }
        let z1z1 = self.mul(lhs.z, lhs.z);
        let z2z2 = self.mul(rhs.z, rhs.z);
        let u1 = self.mul(lhs.x, z2z2);
        let u2 = self.mul(rhs.x, z1z1);
        let s1 = self.mul(lhs.y, self.mul(z2z2, rhs.z));
        let s2 = self.mul(rhs.y, self.mul(z1z1, lhs.z));
        if u1 == u2 {
            return if s1 == s2 {
                self.double(lhs)
            } else {
                Jacobian::INFINITY
            };
        }
        let h = self.sub(u2, u1);
        let r = self.sub(s2, s1);
        let hh = self.mul(h, h);
        let hhh = self.mul(hh, h);
        let u1hh = self.mul(u1, hh);
        let x3 = self.sub(self.sub(self.mul(r, r), hhh), self.add(u1hh, u1hh));
        let y3 = self.sub(self.mul(r, self.sub(u1hh, x3)), self.mul(s1, hhh));
        let z3 = self.mul(h, self.mul(lhs.z, rhs.z));
        Jacobian { x: x3, y: y3, z: z3 }
    }

    pub fn scalar_mul(&self, pt: Jacobian, k: u64) -> Jacobian {
        let mut acc = Jacobian::INFINITY;
        if k == 0 {
            return acc;
        }
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.double(acc);
            if (k >> bit) & 1 == 1 {
                acc = self.add_points(acc, pt);
            }
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All affine points by enumeration.
    fn points(c: &ShortCurve) -> Vec<Jacobian> {
        let mut out = Vec::new();
        for x in 0..c.p {
            for y in 0..c.p {
                if mul_mod(y, y, c.p) == c.rhs(x) {
                    out.push(Jacobian::affine(x, y));
                }
            }
        }
        out
    }

    #[test]
    fn group_order_annihilates_every_point() {
        // y² = x³ − x over F_13 has 8 points (7 affine + infinity)
        let c = ShortCurve { a: 12, b: 0, p: 13 };
        let pts = points(&c);
        assert_eq!(pts.len() + 1, 8);
        for &pt in &pts {
            assert!(c.scalar_mul(pt, 8).is_infinity());
            let sum = c.add_points(pt, c.neg(pt));
            assert!(sum.is_infinity());
        }
    }

    #[test]
    fn addition_is_commutative_and_associative() {
        let c = ShortCurve { a: 2, b: 3, p: 97 };
        let pts = points(&c);
        for &a in pts.iter().take(12) {
            for &b in pts.iter().skip(3).take(12) {
                assert!(c.eq(c.add_points(a, b), c.add_points(b, a)));
                let d = pts[7];
                let lhs = c.add_points(c.add_points(a, b), d);
                let rhs = c.add_points(a, c.add_points(b, d));
                assert!(c.eq(lhs, rhs));
            }
            assert!(c.eq(c.scalar_mul(a, 5), c.add_points(c.double(c.double(a)), a)));
        }
    }
}
