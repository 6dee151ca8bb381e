//! Value parsers for command-line literals.

use num_complex::Complex64;

/// Parse `RE+IMi`, `RE-IMi`, `IMi`, `i`, `-i` or a bare real.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let err = || format!("invalid complex literal `{text}` (expected RE+IMi or a real)");
    let finite = |z: Complex64| if z.re.is_finite() && z.im.is_finite() { Ok(z) } else { Err(err()) };
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err()).and_then(finite);
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => other.parse::<f64>().map_err(|_| err())?,
    };
    let re = if re.is_empty() { 0.0 } else { re.parse::<f64>().map_err(|_| err())? };
    finite(Complex64::new(re, im))
}

/// Parse four comma-separated reals.
pub fn parse_quad(text: &str) -> Result<[f64; 4], String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let err = || format!("expected four comma-separated numbers, got `{text}`");
    if parts.len() != 4 {
        return Err(err());
    }
    let mut out = [0.0_f64; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = p.parse().map_err(|_| err())?;
        if !o.is_finite() {
            return Err(err());
        }
    }
    Ok(out)
}

pub fn parse_finite(text: &str) -> Result<f64, String> {
    match text.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a finite number, got `{text}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("1.0+0.0i"), Ok(c(1.0, 0.0)));
        assert_eq!(parse_complex("1.5-2i"), Ok(c(1.5, -2.0)));
        assert_eq!(parse_complex("-3"), Ok(c(-3.0, 0.0)));
        assert_eq!(parse_complex("0.5i"), Ok(c(0.0, 0.5)));
        assert_eq!(parse_complex("-i"), Ok(c(0.0, -1.0)));
        assert_eq!(parse_complex("i"), Ok(c(0.0, 1.0)));
        assert_eq!(parse_complex("2+i"), Ok(c(2.0, 1.0)));
        assert_eq!(parse_complex("1e-3-2E+1i"), Ok(c(1e-3, -20.0)));
        assert_eq!(parse_complex(" -1 + 2i "), Ok(c(-1.0, 2.0)));
        for bad in ["", "abc", "1+2j", "1+xi", "inf", "1++2i"] {
            assert!(parse_complex(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn quads() {
        assert_eq!(parse_quad("1, 2,3,-4.5"), Ok([1.0, 2.0, 3.0, -4.5]));
        assert!(parse_quad("1,2,3").is_err());
        assert!(parse_quad("1,2,3,nan").is_err());
    }
}
