//! Request specifications.
//!
//! Tokens are separated by whitespace or `;`. Each token is `TARGET` or
//! `TARGET:MULT` where `TARGET` is
//! - a 1-based column index (`3`),
//! - `0` or `zero` for the zero vector,
//! - a vector of integer-encoded field elements (`[1,0,2]`).

use asbpir_core::{GeneratorMatrix, Request};

use crate::CliError;

fn bad(token: &str, why: &str) -> CliError {
    CliError::Input(format!("request token {token:?}: {why}"))
}

pub fn parse_request(spec: &str, g: &GeneratorMatrix) -> Result<Request, CliError> {
    let k = g.k();
    let q = g.field().order() as u32;
    let mut items: Vec<(Vec<u8>, usize)> = Vec::new();
    for token in spec.split(|c: char| c.is_whitespace() || c == ';').filter(|s| !s.is_empty()) {
        let (target, mult) = match token.rsplit_once(':') {
            Some((t, m)) => (t, m.parse::<usize>().map_err(|_| bad(token, "multiplicity is not an integer"))?),
            None => (token, 1),
        };
        if mult == 0 {
            return Err(bad(token, "multiplicity must be positive"));
        }
        let vector = if let Some(inner) = target.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let coords: Vec<u32> = inner
                .split(',')
                .map(|c| c.trim().parse::<u32>().map_err(|_| bad(token, "vector entries must be integers")))
                .collect::<Result<_, _>>()?;
            if coords.len() != k {
                return Err(bad(token, &format!("vector has {} entries, expected {k}", coords.len())));
            }
            if let Some(&c) = coords.iter().find(|&&c| c >= q) {
                return Err(bad(token, &format!("{c} is not an element of GF({q})")));
            }
            coords.into_iter().map(|c| c as u8).collect()
        } else if target == "0" || target == "zero" {
            vec![0; k]
        } else {
            let idx: usize = target.parse().map_err(|_| bad(token, "expected a column index, 0, or [..]"))?;
            if idx == 0 || idx > g.n() {
                return Err(bad(token, &format!("column index must be in 1..={}", g.n())));
            }
            g.column(idx - 1)
        };
        items.push((vector, mult));
    }
    if items.is_empty() {
        return Err(CliError::Input("empty request".into()));
    }
    Ok(Request::new(items)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use asbpir_core::field_of_order;

    fn parity() -> GeneratorMatrix {
        GeneratorMatrix::from_rows(field_of_order(2).unwrap(), &[[1u32, 0, 1], [0, 1, 1]]).unwrap()
    }

    #[test]
    fn tokens() {
        let g = parity();
        let r = parse_request("1:2", &g).unwrap();
        assert_eq!(r.t(), 2);
        assert_eq!(r.items()[0].target, vec![1, 0]);
        let r = parse_request("[1,1]:1; 2 0:3", &g).unwrap();
        assert_eq!(r.t(), 5);
        assert_eq!(r.items().len(), 3);
    }

    #[test]
    fn errors() {
        let g = parity();
        for bad in ["", "4:1", "1:0", "[1]:1", "[1,2]:1", "x:1", "1:y"] {
            assert!(parse_request(bad, &g).is_err(), "{bad:?}");
        }
    }
}
