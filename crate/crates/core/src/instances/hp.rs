//! Fixed 320-bit binary floating point, used to build and check the greedy
//! lower-bound instance where the quantities that must be ordered differ by far
//! less than one f64 ulp of their magnitude.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use dashu_float::round::mode::HalfEven;
use dashu_float::FBig;

pub const PRECISION: usize = 320;

type F = FBig<HalfEven, 2>;

#[derive(Clone, PartialEq, PartialOrd)]
pub struct Hp(F);

impl Hp {
    pub fn int(v: u64) -> Hp {
        Hp(F::from(v).with_precision(PRECISION).value())
    }

    pub fn from_f64(v: f64) -> Hp {
        Hp(F::try_from(v)
            .expect("finite")
            .with_precision(PRECISION)
            .value())
    }

    pub fn zero() -> Hp {
        Hp::int(0)
    }

    pub fn one() -> Hp {
        Hp::int(1)
    }

    pub fn sqrt(&self) -> Hp {
        Hp(self.0.sqrt())
    }

    pub fn square(&self) -> Hp {
        self * self
    }

    pub fn powu(&self, e: u32) -> Hp {
        let mut r = Hp::one();
        for _ in 0..e {
            r = &r * self;
        }
        r
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().value()
    }

    pub fn is_positive(&self) -> bool {
        *self > Hp::zero()
    }

    pub fn max(self, other: Hp) -> Hp {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Hp) -> Hp {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn cmp(&self, other: &Hp) -> Ordering {
        self.partial_cmp(other).expect("finite")
    }
}

impl fmt::Debug for Hp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Hp> for &Hp {
            type Output = Hp;
            fn $m(self, rhs: &Hp) -> Hp {
                Hp($tr::$m(&self.0, &rhs.0))
            }
        }
        impl $tr<Hp> for Hp {
            type Output = Hp;
            fn $m(self, rhs: Hp) -> Hp {
                Hp($tr::$m(self.0, rhs.0))
            }
        }
        impl $tr<&Hp> for Hp {
            type Output = Hp;
            fn $m(self, rhs: &Hp) -> Hp {
                Hp($tr::$m(self.0, &rhs.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Neg for Hp {
    type Output = Hp;
    fn neg(self) -> Hp {
        Hp(-self.0)
    }
}
