//! Float math routed through `libm` when built without `std`.

#![allow(dead_code)]

macro_rules! route {
    ($(fn $name:ident($($arg:ident),+) => $libm:ident;)*) => {
        $(
            #[cfg(feature = "std")]
            #[inline(always)]
            pub fn $name($($arg: f64),+) -> f64 { f64::$name($($arg),+) }
            #[cfg(not(feature = "std"))]
            #[inline(always)]
            pub fn $name($($arg: f64),+) -> f64 { libm::$libm($($arg),+) }
        )*
    };
}

route! {
    fn ln(x) => log;
    fn log2(x) => log2;
    fn exp(x) => exp;
    fn sqrt(x) => sqrt;
    fn cos(x) => cos;
    fn sin(x) => sin;
    fn acos(x) => acos;
    fn abs(x) => fabs;
    fn round(x) => round;
    fn floor(x) => floor;
    fn hypot(x, y) => hypot;
    fn copysign(x, y) => copysign;
    fn powf(x, y) => pow;
}

/// `x^n` for small integer exponents by binary exponentiation, with the
/// `0^0 = 1` convention the class-sum formulas rely on.
#[inline]
pub fn powi(x: f64, n: u32) -> f64 {
    let mut base = x;
    let mut n = n;
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= base;
        }
        base *= base;
        n >>= 1;
    }
    acc
}
