//! Robust planar orientation and incircle predicates.
//!
//! Both predicates run a cheap floating-point evaluation first and accept its
//! sign whenever the magnitude clears a conservative forward-error bound (the
//! classic filter constants for these determinant forms). Results inside the
//! bound are recomputed in exact rational arithmetic, so the reported sign is
//! always the true sign — including exact zero for collinear or cocircular
//! inputs.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// Half-ulp of 1.0; the unit used by the filter error bounds.
const EPS: f64 = f64::EPSILON / 2.0;
const CCW_ERRBOUND: f64 = (3.0 + 16.0 * EPS) * EPS;
const ICC_ERRBOUND: f64 = (10.0 + 96.0 * EPS) * EPS;

/// Sign of an exactly evaluated geometric determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(v: f64) -> Self {
        if v > 0.0 {
            Sign::Positive
        } else if v < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }

    pub fn is_positive(self) -> bool {
        self == Sign::Positive
    }

    pub fn is_negative(self) -> bool {
        self == Sign::Negative
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }
}

fn rat(v: f64) -> BigRational {
    BigRational::from_float(v).expect("predicate input must be finite")
}

fn sign_of_rational(v: &BigRational) -> Sign {
    if v.is_zero() {
        Sign::Zero
    } else if v.is_positive() {
        Sign::Positive
    } else {
        Sign::Negative
    }
}

/// Orientation of `c` relative to the directed line `a -> b`.
///
/// `Positive` means `c` lies strictly to the left (the triple is
/// counterclockwise), `Negative` strictly to the right, `Zero` collinear.
pub fn orient2d(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    let detleft = (a[0] - c[0]) * (b[1] - c[1]);
    let detright = (a[1] - c[1]) * (b[0] - c[0]);
    let det = detleft - detright;

    let detsum = if detleft > 0.0 {
        if detright <= 0.0 {
            return Sign::of(det);
        }
        detleft + detright
    } else if detleft < 0.0 {
        if detright >= 0.0 {
            return Sign::of(det);
        }
        -detleft - detright
    } else {
        // detleft is exactly zero, so det = -detright is exact.
        return Sign::of(det);
    };

    let errbound = CCW_ERRBOUND * detsum;
    if det >= errbound || -det >= errbound {
        return Sign::of(det);
    }
    orient2d_exact(a, b, c)
}

fn orient2d_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Sign {
    let det = (rat(a[0]) - rat(c[0])) * (rat(b[1]) - rat(c[1]))
        - (rat(a[1]) - rat(c[1])) * (rat(b[0]) - rat(c[0]));
    sign_of_rational(&det)
}

/// Incircle test: position of `d` relative to the circumcircle of the
/// counterclockwise triangle `(a, b, c)`.
///
/// `Positive` means strictly inside, `Negative` strictly outside, `Zero`
/// exactly cocircular. Callers must pass `(a, b, c)` in counterclockwise
/// order; a clockwise triple flips the sign.
pub fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let adx = a[0] - d[0];
    let bdx = b[0] - d[0];
    let cdx = c[0] - d[0];
    let ady = a[1] - d[1];
    let bdy = b[1] - d[1];
    let cdy = c[1] - d[1];

    let bdxcdy = bdx * cdy;
    let cdxbdy = cdx * bdy;
    let alift = adx * adx + ady * ady;

    let cdxady = cdx * ady;
    let adxcdy = adx * cdy;
    let blift = bdx * bdx + bdy * bdy;

    let adxbdy = adx * bdy;
    let bdxady = bdx * ady;
    let clift = cdx * cdx + cdy * cdy;

    let det = alift * (bdxcdy - cdxbdy) + blift * (cdxady - adxcdy) + clift * (adxbdy - bdxady);

    let permanent = (bdxcdy.abs() + cdxbdy.abs()) * alift
        + (cdxady.abs() + adxcdy.abs()) * blift
        + (adxbdy.abs() + bdxady.abs()) * clift;
    let errbound = ICC_ERRBOUND * permanent;
    if det > errbound || -det > errbound {
        return Sign::of(det);
    }
    incircle_exact(a, b, c, d)
}

fn incircle_exact(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> Sign {
    let adx = rat(a[0]) - rat(d[0]);
    let bdx = rat(b[0]) - rat(d[0]);
    let cdx = rat(c[0]) - rat(d[0]);
    let ady = rat(a[1]) - rat(d[1]);
    let bdy = rat(b[1]) - rat(d[1]);
    let cdy = rat(c[1]) - rat(d[1]);

    let alift = &adx * &adx + &ady * &ady;
    let blift = &bdx * &bdx + &bdy * &bdy;
    let clift = &cdx * &cdx + &cdy * &cdy;

    let det = alift * (&bdx * &cdy - &cdx * &bdy) + blift * (&cdx * &ady - &adx * &cdy)
        + clift * (&adx * &bdy - &bdx * &ady);
    sign_of_rational(&det)
}
