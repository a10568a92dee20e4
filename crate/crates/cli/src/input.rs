//! Parsing of data files and θ specifications.

use std::io::Read;

use stepwise::models::{ExtReal, ThetaVector};

/// One row of a `hypothesis_id,value` file.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: String,
    pub value: f64,
}

/// Reads a headered two-column CSV. Accepts LF or CRLF line endings and a
/// leading byte-order mark.
pub fn read_rows(reader: impl Read) -> Result<Vec<Row>, String> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| format!("bad header: {e}"))?.clone();
    let names: Vec<&str> = header.iter().map(|h| h.trim_start_matches('\u{feff}')).collect();
    if names != ["hypothesis_id", "value"] {
        return Err(format!("expected header hypothesis_id,value, found {}", names.join(",")));
    }
    let mut rows = Vec::new();
    for (n, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| format!("line {}: {e}", n + 2))?;
        if rec.len() != 2 {
            return Err(format!("line {}: expected 2 fields, found {}", n + 2, rec.len()));
        }
        let id = rec[0].to_string();
        let value = parse_number(&rec[1]).map_err(|e| format!("line {}: {e}", n + 2))?;
        rows.push(Row { id, value });
    }
    if rows.is_empty() {
        return Err("no data rows".into());
    }
    Ok(rows)
}

/// A finite number or a signed infinity; NaN is refused.
pub fn parse_number(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let v = match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => t.parse::<f64>().map_err(|_| format!("not a number: {t:?}"))?,
    };
    if v.is_nan() {
        return Err("value is NaN".into());
    }
    Ok(v)
}

/// Parses `--theta`: either a comma list of numbers and `inf`/`-inf`, or
/// `eps:<ε>@<count>` meaning `count` coordinates at ε and the rest at `-inf`,
/// which needs `k`.
pub fn parse_theta(spec: &str, k: Option<usize>) -> Result<ThetaVector<f64>, String> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("eps:") {
        let (eps, count) = rest.split_once('@').ok_or("expected eps:<value>@<count>")?;
        let eps = parse_number(eps)?;
        if !eps.is_finite() {
            return Err("epsilon must be finite".into());
        }
        let count: usize = count.trim().parse().map_err(|_| format!("bad count {count:?}"))?;
        let k = k.ok_or("--k is required with eps:<value>@<count>")?;
        if count > k {
            return Err(format!("count {count} exceeds k = {k}"));
        }
        let mut v = vec![ExtReal::Finite(eps); count];
        v.resize(k, ExtReal::NegInf);
        return Ok(ThetaVector(v));
    }
    let v: Vec<ExtReal<f64>> = spec
        .split(',')
        .map(|tok| parse_number(tok).map(ExtReal::from_float))
        .collect::<Result<_, _>>()?;
    if let Some(k) = k {
        if k != v.len() {
            return Err(format!("theta has {} entries but k = {k}", v.len()));
        }
    }
    Ok(ThetaVector(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crlf_and_bom() {
        let rows = read_rows("\u{feff}hypothesis_id,value\r\nA,1.5\r\nB,-inf\r\n".as_bytes()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[1], Row { id: "B".into(), value: f64::NEG_INFINITY });
    }

    #[test]
    fn malformed_files() {
        assert!(read_rows("hypothesis_id,value\n".as_bytes()).is_err());
        assert!(read_rows("".as_bytes()).is_err());
        assert!(read_rows("id,value\nA,1\n".as_bytes()).is_err());
        assert!(read_rows("hypothesis_id,value\nA,x\n".as_bytes()).is_err());
        assert!(read_rows("hypothesis_id,value\nA,NaN\n".as_bytes()).is_err());
        assert!(read_rows("hypothesis_id,value\nA,1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn theta_forms() {
        let t = parse_theta("0, 0,inf", None).unwrap();
        assert_eq!(t.0, vec![ExtReal::Finite(0.0), ExtReal::Finite(0.0), ExtReal::PosInf]);
        let t = parse_theta("eps:2@2", Some(4)).unwrap();
        assert_eq!(t.0, vec![ExtReal::Finite(2.0), ExtReal::Finite(2.0), ExtReal::NegInf, ExtReal::NegInf]);
        assert!(parse_theta("eps:2@2", None).is_err());
        assert!(parse_theta("eps:2@5", Some(4)).is_err());
        assert!(parse_theta("0,0", Some(3)).is_err());
        assert!(parse_theta("0,nan", None).is_err());
        assert_eq!(parse_theta("-inf,1", None).unwrap().0[0], ExtReal::NegInf);
    }
}
