//! Standalone quaternion and matrix arithmetic on coordinate arrays, used to re-check library
//! results without going through the library's own multiplication or inversion.

#![allow(dead_code)]

use commlen::{MatD, Quat, Rat};
use num_traits::{One, Zero};

pub type Q = [Rat; 4];
pub type M = Vec<Vec<Q>>;

#[derive(Clone)]
pub struct Oracle {
    pub a: Rat,
    pub b: Rat,
}

pub fn r(v: i64) -> Rat {
    Rat::from_integer(v.into())
}

impl Oracle {
    pub fn new(a: i64, b: i64) -> Self {
        Oracle { a: r(a), b: r(b) }
    }

    pub fn zero(&self) -> Q {
        [r(0), r(0), r(0), r(0)]
    }

    pub fn one(&self) -> Q {
        [r(1), r(0), r(0), r(0)]
    }

    /// Basis table: `i^2 = a`, `j^2 = b`, `k = ij = -ji`, `ik = a j`, `ki = -a j`,
    /// `kj = b i`, `jk = -b i`, `k^2 = -ab`.
    pub fn mul(&self, p: &Q, q: &Q) -> Q {
        let (a, b) = (&self.a, &self.b);
        let [w1, x1, y1, z1] = p;
        let [w2, x2, y2, z2] = q;
        [
            w1 * w2 + a * x1 * x2 + b * y1 * y2 - a * b * z1 * z2,
            w1 * x2 + x1 * w2 - b * y1 * z2 + b * z1 * y2,
            w1 * y2 + y1 * w2 + a * x1 * z2 - a * z1 * x2,
            w1 * z2 + z1 * w2 + x1 * y2 - y1 * x2,
        ]
    }

    pub fn add(&self, p: &Q, q: &Q) -> Q {
        [&p[0] + &q[0], &p[1] + &q[1], &p[2] + &q[2], &p[3] + &q[3]]
    }

    pub fn neg(&self, p: &Q) -> Q {
        [-&p[0], -&p[1], -&p[2], -&p[3]]
    }

    pub fn norm(&self, p: &Q) -> Rat {
        let [w, x, y, z] = p;
        w * w - &self.a * x * x - &self.b * y * y + &self.a * &self.b * z * z
    }

    pub fn inv(&self, p: &Q) -> Q {
        let n = self.norm(p);
        assert!(!n.is_zero(), "oracle: zero divisor");
        [&p[0] / &n, -&p[1] / &n, -&p[2] / &n, -&p[3] / &n]
    }

    pub fn is_zero(&self, p: &Q) -> bool {
        p.iter().all(Zero::is_zero)
    }

    pub fn identity(&self, n: usize) -> M {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { self.one() } else { self.zero() })
                    .collect()
            })
            .collect()
    }

    pub fn mat_mul(&self, x: &M, y: &M) -> M {
        let n = x.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        (0..n).fold(self.zero(), |acc, k| {
                            self.add(&acc, &self.mul(&x[i][k], &y[k][j]))
                        })
                    })
                    .collect()
            })
            .collect()
    }

    /// Gauss-Jordan with row swaps.
    pub fn mat_inv(&self, x: &M) -> M {
        let n = x.len();
        let mut a = x.clone();
        let mut b = self.identity(n);
        for c in 0..n {
            let p = (c..n)
                .find(|&r| !self.is_zero(&a[r][c]))
                .expect("oracle: singular matrix");
            a.swap(c, p);
            b.swap(c, p);
            let s = self.inv(&a[c][c]);
            for j in 0..n {
                a[c][j] = self.mul(&s, &a[c][j]);
                b[c][j] = self.mul(&s, &b[c][j]);
            }
            for r in 0..n {
                if r != c && !self.is_zero(&a[r][c]) {
                    let f = self.neg(&a[r][c]);
                    for j in 0..n {
                        a[r][j] = self.add(&a[r][j], &self.mul(&f, &a[c][j]));
                        b[r][j] = self.add(&b[r][j], &self.mul(&f, &b[c][j]));
                    }
                }
            }
        }
        b
    }

    pub fn mat_comm(&self, x: &M, y: &M) -> M {
        let xy = self.mat_mul(x, y);
        self.mat_mul(&xy, &self.mat_inv(&self.mat_mul(y, x)))
    }

    pub fn q_comm(&self, x: &Q, y: &Q) -> Q {
        self.mul(&self.mul(x, y), &self.inv(&self.mul(y, x)))
    }

    pub fn transvection(&self, n: usize, i: usize, j: usize, xi: &Q) -> M {
        let mut m = self.identity(n);
        m[i][j] = xi.clone();
        m
    }

    pub fn diag(&self, d: &[Q]) -> M {
        let mut m = self.identity(d.len());
        for (i, q) in d.iter().enumerate() {
            m[i][i] = q.clone();
        }
        m
    }

    /// Product of quaternion commutators.
    pub fn q_cert_value(&self, pairs: &[(Quat, Quat)]) -> Q {
        pairs.iter().fold(self.one(), |acc, (x, y)| {
            self.mul(&acc, &self.q_comm(&q(x), &q(y)))
        })
    }

    /// Product of matrix commutators.
    pub fn m_cert_value(&self, pairs: &[(MatD, MatD)], n: usize) -> M {
        pairs.iter().fold(self.identity(n), |acc, (x, y)| {
            self.mat_mul(&acc, &self.mat_comm(&m(x), &m(y)))
        })
    }
}

pub fn q(x: &Quat) -> Q {
    let [w, a, b, c] = x.coords();
    [w.clone(), a.clone(), b.clone(), c.clone()]
}

pub fn m(x: &MatD) -> M {
    x.rows()
        .iter()
        .map(|row| row.iter().map(q).collect())
        .collect()
}

pub fn is_one(p: &Q) -> bool {
    p[0].is_one() && p[1..].iter().all(Zero::is_zero)
}
