//! Parsers for command-line values.

use omra_core::{ScaleFactor, Variant};

/// `omra`, `a`, `b` or `fixed:S`.
pub fn parse_variant(s: &str) -> Result<Variant, String> {
    match s {
        "omra" => Ok(Variant::Omra),
        "a" => Ok(Variant::VariantA),
        "b" => Ok(Variant::VariantB),
        _ => {
            let scale = s.strip_prefix("fixed:").ok_or_else(|| format!("unknown variant `{s}`"))?;
            Ok(Variant::FixedS(parse_scale(scale)?))
        }
    }
}

pub fn variant_name(v: Variant) -> String {
    match v {
        Variant::Omra => "omra".into(),
        Variant::VariantA => "a".into(),
        Variant::VariantB => "b".into(),
        Variant::FixedS(s) => format!("fixed:{s}"),
    }
}

pub fn parse_scale(s: &str) -> Result<ScaleFactor, String> {
    let v: u32 = s.trim().parse().map_err(|_| format!("bad scale `{s}`"))?;
    ScaleFactor::new(v).map_err(|e| e.to_string())
}

/// Comma-separated reals.
pub fn parse_reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| format!("bad number `{v}`")))
        .collect()
}

/// `x,y` pair of reals.
pub fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    match parse_reals(s)?[..] {
        [x, y] => Ok((x, y)),
        _ => Err(format!("expected two comma-separated numbers, got `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variants_round_trip() {
        for v in ["omra", "a", "b", "fixed:1", "fixed:8"] {
            assert_eq!(variant_name(parse_variant(v).unwrap()), v);
        }
        assert!(parse_variant("fixed:3").is_err());
        assert!(parse_variant("c").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_scale(" 8").unwrap().get(), 8);
        assert!(parse_scale("3").is_err());
        assert_eq!(parse_reals("8,12.5").unwrap(), [8.0, 12.5]);
        assert_eq!(parse_pair("3,-0.5").unwrap(), (3.0, -0.5));
        assert!(parse_pair("3").is_err());
    }
}
