use super::HalfInt;
use crate::math::sqrt;
use crate::{Error, Result};

fn factorial(n: i32) -> f64 {
    (2..=n).fold(1.0, |acc, k| acc * k as f64)
}

fn validate(j: HalfInt, m: HalfInt) -> Result<()> {
    if j.twice() < 0 || m.twice().abs() > j.twice() || (j.twice() - m.twice()) % 2 != 0 {
        return Err(Error::InvalidInput(alloc::format!(
            "invalid angular momentum pair j = {j}, m = {m}"
        )));
    }
    Ok(())
}

/// ⟨j1 m1; j2 m2 | J M⟩ in the Condon–Shortley convention (Racah's formula).
///
/// Returns 0 when `M ≠ m1 + m2` or the triangle condition fails.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    validate(j1, m1)?;
    validate(j2, m2)?;
    validate(j, m)?;
    let (tj1, tm1, tj2, tm2, tj, tm) = (
        j1.twice(),
        m1.twice(),
        j2.twice(),
        m2.twice(),
        j.twice(),
        m.twice(),
    );
    if tm != tm1 + tm2 {
        return Ok(0.0);
    }
    if tj < (tj1 - tj2).abs() || tj > tj1 + tj2 || (tj1 + tj2 + tj) % 2 != 0 {
        return Ok(0.0);
    }
    // all combinations below are integers once divided by two
    let h = |twice: i32| twice / 2;
    let a = h(tj1 + tj2 - tj);
    let b = h(tj1 - tm1);
    let c = h(tj2 + tm2);
    let d = h(tj - tj2 + tm1);
    let e = h(tj - tj1 - tm2);

    let pre = (tj + 1) as f64
        * factorial(h(tj + tj1 - tj2))
        * factorial(h(tj - tj1 + tj2))
        * factorial(a)
        / factorial(h(tj1 + tj2 + tj) + 1);
    let norm = factorial(h(tj + tm))
        * factorial(h(tj - tm))
        * factorial(h(tj1 - tm1))
        * factorial(h(tj1 + tm1))
        * factorial(h(tj2 - tm2))
        * factorial(h(tj2 + tm2));

    let kmin = 0.max(-d).max(-e);
    let kmax = a.min(b).min(c);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = factorial(k)
            * factorial(a - k)
            * factorial(b - k)
            * factorial(c - k)
            * factorial(d + k)
            * factorial(e + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / den;
    }
    Ok(sqrt(pre * norm) * sum)
}

/// [`clebsch_gordan`] taking plain numbers; non-half-integers are an input error.
pub fn clebsch_gordan_f64(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64> {
    clebsch_gordan(
        HalfInt::from_f64(j1)?,
        HalfInt::from_f64(m1)?,
        HalfInt::from_f64(j2)?,
        HalfInt::from_f64(m2)?,
        HalfInt::from_f64(j)?,
        HalfInt::from_f64(m)?,
    )
}
