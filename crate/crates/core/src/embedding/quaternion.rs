use std::ops::{Add, Mul, Sub};

/// `a + b i + c j + d k`, stored as `[a, b, c, d]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Quaternion([a, b, c, d])
    }

    pub fn from_slice(s: &[f64]) -> Self {
        Quaternion([s[0], s[1], s[2], s[3]])
    }

    /// Hamilton product `self ⊗ rhs`.
    #[inline]
    pub fn hamilton(self, rhs: Quaternion) -> Quaternion {
        let [a1, b1, c1, d1] = self.0;
        let [a2, b2, c2, d2] = rhs.0;
        Quaternion([
            a1 * a2 - b1 * b2 - c1 * c2 - d1 * d2,
            a1 * b2 + b1 * a2 + c1 * d2 - d1 * c2,
            a1 * c2 - b1 * d2 + c1 * a2 + d1 * b2,
            a1 * d2 + b1 * c2 - c1 * b2 + d1 * a2,
        ])
    }

    pub fn conj(self) -> Quaternion {
        let [a, b, c, d] = self.0;
        Quaternion([a, -b, -c, -d])
    }

    pub fn dot(self, rhs: Quaternion) -> f64 {
        self.0.iter().zip(rhs.0.iter()).map(|(x, y)| x * y).sum()
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scale(self, s: f64) -> Quaternion {
        Quaternion(self.0.map(|x| x * s))
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, rhs: Quaternion) -> Quaternion {
        self.hamilton(rhs)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, rhs: Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|i| self.0[i] + rhs.0[i]))
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, rhs: Quaternion) -> Quaternion {
        Quaternion(std::array::from_fn(|i| self.0[i] - rhs.0[i]))
    }
}
