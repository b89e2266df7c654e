//! Small numerical utilities shared across modules.

/// A product accumulated as `sign * exp(log_abs)`.
///
/// Gap products in the eigenvalue identities span hundreds of orders of
/// magnitude; accumulating logarithms keeps them finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    pub sign: f64,
    pub log_abs: f64,
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::one()
    }
}

impl SignedLog {
    pub fn one() -> Self {
        Self { sign: 1.0, log_abs: 0.0 }
    }

    pub fn zero() -> Self {
        Self { sign: 0.0, log_abs: f64::NEG_INFINITY }
    }

    pub fn from_value(x: f64) -> Self {
        let mut p = Self::one();
        p.mul(x);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0.0
    }

    pub fn mul(&mut self, x: f64) {
        if x == 0.0 {
            *self = Self::zero();
        } else if !self.is_zero() {
            self.sign *= x.signum();
            self.log_abs += x.abs().ln();
        }
    }

    /// Multiplies by `x^m` for a nonnegative integer exponent.
    pub fn mul_pow(&mut self, x: f64, m: u32) {
        for _ in 0..m {
            self.mul(x);
        }
    }

    /// Divides by `x`; division by zero yields a non-finite log magnitude.
    pub fn div(&mut self, x: f64) {
        if x == 0.0 {
            self.log_abs = f64::INFINITY;
        } else if !self.is_zero() {
            self.sign *= x.signum();
            self.log_abs -= x.abs().ln();
        }
    }

    pub fn mul_signed(&mut self, other: SignedLog) {
        if other.is_zero() {
            *self = Self::zero();
        } else if !self.is_zero() {
            self.sign *= other.sign;
            self.log_abs += other.log_abs;
        }
    }

    pub fn div_signed(&mut self, other: SignedLog) {
        if other.is_zero() {
            self.log_abs = f64::INFINITY;
        } else if !self.is_zero() {
            self.sign *= other.sign;
            self.log_abs -= other.log_abs;
        }
    }

    pub fn value(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.sign * self.log_abs.exp()
        }
    }
}

/// Outcome of a bracketed root search.
#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Brent's method (inverse quadratic interpolation, secant and bisection
/// safeguards) on a sign-changing bracket `[lo, hi]`.
///
/// Stops when the bracket is below `xtol + 4 eps |x|` or `f` is exactly
/// zero. Returns `None` if the bracket does not change sign or the
/// iteration budget runs out.
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, xtol: f64, max_iter: usize) -> Option<Root> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Some(Root { x: a, iterations: 0, bracket: (a, a) });
    }
    if fb == 0.0 {
        return Some(Root { x: b, iterations: 0, bracket: (b, b) });
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for it in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            let (l, h) = if b < c { (b, c) } else { (c, b) };
            return Some(Root { x: b, iterations: it, bracket: (l, h) });
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b);
    }
    None
}

/// Composite Simpson rule on uniformly spaced samples. An odd number of
/// intervals is closed with Simpson's 3/8 rule on the last three.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (values[0] + values[1]),
        3 => h / 3.0 * (values[0] + 4.0 * values[1] + values[2]),
        _ => {
            let intervals = n - 1;
            let simpson_end = if intervals.is_multiple_of(2) { n - 1 } else { n - 4 };
            let mut s = values[0] + values[simpson_end];
            for i in 1..simpson_end {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * values[i];
            }
            let mut total = h / 3.0 * s;
            if simpson_end != n - 1 {
                let v = &values[n - 4..];
                total += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            total
        }
    }
}

/// 17-significant-digit rendering used in every CSV/JSON table.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// FNV-1a over a byte string; stable across runs and builds.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}
