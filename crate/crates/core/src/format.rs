//! Fixed textual formatting shared by CSV and JSON writers.

/// 12 significant digits in scientific or plain notation; `inf` / `-inf`
/// for infinities and `nan` for NaN.
pub fn csv_float(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let exp = v.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        trim_fraction(&s)
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("scientific notation");
        format!("{}e{}", trim_fraction(mantissa), e)
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `10 log10(x)` formatted for CSV.
pub fn csv_db(linear: f64) -> String {
    csv_float(10.0 * linear.log10())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(csv_float(0.0), "0");
        assert_eq!(csv_float(1.5), "1.5");
        assert_eq!(csv_float(-1.591745389548615), "-1.59174538955");
        assert_eq!(csv_float(1e-9), "1e-9");
        assert_eq!(csv_float(123456.0), "123456");
        assert_eq!(csv_float(f64::INFINITY), "inf");
        assert_eq!(csv_float(2.0 / 3.0), "0.666666666667");
        assert_eq!(csv_float(1.2345678901234e15), "1.23456789012e15");
        assert_eq!(csv_db(0.0), "-inf");
    }
}
