//! Arbitrary-precision reference values for the error-function family.
//!
//! Plain power series summed in 640-bit fixed point. Slow, but cancellation
//! in the alternating series is harmless at this precision for |z| ≤ 10,
//! which makes these independent of the production algorithms.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};

const BITS: u64 = 640;

#[derive(Clone, Debug)]
pub struct Fx(BigInt);

impl Fx {
    fn zero() -> Self {
        Fx(BigInt::zero())
    }

    fn one() -> Self {
        Fx(BigInt::one() << BITS)
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite());
        if x == 0.0 {
            return Fx::zero();
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mantissa, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mantissa) * sign;
        let shift = e + BITS as i64;
        if shift >= 0 {
            Fx(m << shift as u64)
        } else {
            Fx(m >> (-shift) as u64)
        }
    }

    pub fn to_f64(&self) -> f64 {
        // Keep 64 significant bits, then scale; exact apart from the final rounding.
        let len = self.0.bits() as i64;
        let drop = (len - 64).max(0);
        let top = (&self.0 >> drop as u64).to_f64().unwrap();
        top * 2f64.powi((drop - BITS as i64) as i32)
    }

    fn add(&self, o: &Fx) -> Fx {
        Fx(&self.0 + &o.0)
    }

    fn sub(&self, o: &Fx) -> Fx {
        Fx(&self.0 - &o.0)
    }

    fn mul(&self, o: &Fx) -> Fx {
        Fx((&self.0 * &o.0) >> BITS)
    }

    fn div_int(&self, k: i64) -> Fx {
        Fx(&self.0 / k)
    }

    fn neg(&self) -> Fx {
        Fx(-&self.0)
    }

    fn sqrt(&self) -> Fx {
        assert!(!self.0.is_negative());
        Fx((&self.0 << BITS).sqrt())
    }

    fn is_negligible(&self) -> bool {
        self.0.bits() < 8
    }
}

#[derive(Clone, Debug)]
pub struct Cx {
    re: Fx,
    im: Fx,
}

impl Cx {
    pub fn from_c64(z: Complex64) -> Self {
        Cx {
            re: Fx::from_f64(z.re),
            im: Fx::from_f64(z.im),
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn real(x: Fx) -> Self {
        Cx { re: x, im: Fx::zero() }
    }

    fn add(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.add(&o.re),
            im: self.im.add(&o.im),
        }
    }

    fn sub(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.sub(&o.re),
            im: self.im.sub(&o.im),
        }
    }

    fn mul(&self, o: &Cx) -> Cx {
        Cx {
            re: self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            im: self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        }
    }

    fn scale(&self, x: &Fx) -> Cx {
        Cx {
            re: self.re.mul(x),
            im: self.im.mul(x),
        }
    }

    fn div_int(&self, k: i64) -> Cx {
        Cx {
            re: self.re.div_int(k),
            im: self.im.div_int(k),
        }
    }

    fn neg(&self) -> Cx {
        Cx {
            re: self.re.neg(),
            im: self.im.neg(),
        }
    }

    /// Multiply by i.
    fn times_i(&self) -> Cx {
        Cx {
            re: self.im.neg(),
            im: self.re.clone(),
        }
    }

    fn is_negligible(&self) -> bool {
        self.re.is_negligible() && self.im.is_negligible()
    }
}

fn atan_inv(x: i64) -> Fx {
    let x2 = x * x;
    let mut power = Fx::one().div_int(x);
    let mut sum = power.clone();
    let mut k = 1;
    loop {
        power = power.div_int(x2);
        if power.is_negligible() {
            return sum;
        }
        let term = power.div_int(2 * k + 1);
        sum = if k % 2 == 1 { sum.sub(&term) } else { sum.add(&term) };
        k += 1;
    }
}

pub fn pi() -> Fx {
    atan_inv(5).div_int(1).mul(&Fx::from_f64(16.0)).sub(&atan_inv(239).mul(&Fx::from_f64(4.0)))
}

fn two_over_sqrt_pi() -> Fx {
    let sqrt_pi = pi().sqrt();
    Fx((Fx::from_f64(2.0).0 << BITS) / sqrt_pi.0)
}

fn exp(z: &Cx) -> Cx {
    let mut term = Cx::real(Fx::one());
    let mut sum = term.clone();
    for k in 1..100_000 {
        term = term.mul(z).div_int(k);
        sum = sum.add(&term);
        if term.is_negligible() && k > 4 {
            break;
        }
    }
    sum
}

/// erf(z) = (2/√π) Σ (−1)ⁿ z^{2n+1}/(n!(2n+1)).
fn erf(z: &Cx) -> Cx {
    let z2 = z.mul(z).neg();
    let mut power = z.clone();
    let mut sum = z.clone();
    for n in 1..100_000_i64 {
        power = power.mul(&z2).div_int(n);
        sum = sum.add(&power.div_int(2 * n + 1));
        if power.is_negligible() && n > 4 {
            break;
        }
    }
    sum.scale(&two_over_sqrt_pi())
}

/// Faddeeva w(z) = e^{−z²}(1 − erf(−iz)).
pub fn faddeeva(z: Complex64) -> Complex64 {
    let z = Cx::from_c64(z);
    let minus_iz = z.times_i().neg();
    let erfc = Cx::real(Fx::one()).sub(&erf(&minus_iz));
    exp(&z.mul(&z).neg()).mul(&erfc).to_c64()
}

/// Dawson function by its defining alternating series Σ (−1)ⁿ 2ⁿ z^{2n+1}/(2n+1)!!.
pub fn dawson(z: Complex64) -> Complex64 {
    let z = Cx::from_c64(z);
    let factor = z.mul(&z).scale(&Fx::from_f64(-2.0));
    let mut term = z.clone();
    let mut sum = z.clone();
    for n in 1..100_000_i64 {
        term = term.mul(&factor).div_int(2 * n + 1);
        sum = sum.add(&term);
        if term.is_negligible() && n > 4 {
            break;
        }
    }
    sum.to_c64()
}

/// erfi(x) = −i erf(ix), real argument.
pub fn erfi(x: f64) -> f64 {
    let ix = Cx::from_c64(Complex64::new(0.0, x));
    erf(&ix).times_i().neg().to_c64().re
}

/// erfc(x), real argument.
pub fn erfc(x: f64) -> f64 {
    let z = Cx::from_c64(Complex64::new(x, 0.0));
    Cx::real(Fx::one()).sub(&erf(&z)).to_c64().re
}

/// e^x for real x, at full precision.
pub fn exp_real(x: f64) -> f64 {
    exp(&Cx::from_c64(Complex64::new(x, 0.0))).to_c64().re
}
