use tuv_core::GramMatrix;

/// Parses `"d1,d2,d3"` as a diagonal form or `"[[..],[..],[..]]"` as a row-major Gram matrix.
pub fn parse_form(s: &str) -> Result<GramMatrix, String> {
    let s = s.trim();
    let entries: [[i64; 3]; 3] = if s.starts_with('[') {
        serde_json::from_str(s).map_err(|e| format!("form `{s}`: {e}"))?
    } else {
        let d: Vec<i64> = s
            .split(',')
            .map(|p| p.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|e| format!("form `{s}`: {e}"))?;
        let [a, b, c] = d[..] else {
            return Err(format!("form `{s}`: expected three diagonal entries"));
        };
        [[a, 0, 0], [0, b, 0], [0, 0, c]]
    };
    GramMatrix::new(entries).map_err(|e| format!("form `{s}`: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_syntaxes() {
        let d = parse_form("1, 3,3").unwrap();
        assert_eq!(d.entries(), &[[1, 0, 0], [0, 3, 0], [0, 0, 3]]);
        let g = parse_form("[[6,0,0],[0,40,20],[0,20,25]]").unwrap();
        assert_eq!(g.det(), 6 * (1000 - 400));
    }

    #[test]
    fn rejects_bad_input() {
        for s in ["1,2", "1,2,x", "1,-2,3", "[[1,1,0],[0,1,0],[0,0,1]]", "[[1,0],[0,1]]"] {
            assert!(parse_form(s).is_err(), "{s}");
        }
    }
}
