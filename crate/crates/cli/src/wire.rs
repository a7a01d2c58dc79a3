//! Line format for node reports: `node_id<TAB>id:p,id:p,...`.

use byzfdr_core::report::PValueReport;
use thiserror::Error;

use crate::fmt::float;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}, field {field}: {message}")]
pub struct WireError {
    pub line: usize,
    /// 1 is the node id, `k + 1` the `k`-th entry.
    pub field: usize,
    pub message: String,
}

pub fn serialize_report(report: &PValueReport) -> String {
    let entries: Vec<String> = report.entries.iter().map(|&(id, p)| format!("{id}:{}", float(p))).collect();
    format!("{}\t{}", report.node_id, entries.join(","))
}

/// Parses one record; `line` is only used for error positions.
pub fn parse_report(text: &str, line: usize) -> Result<PValueReport, WireError> {
    let err = |field, message: String| WireError { line, field, message };
    let (node, rest) = text.split_once('\t').ok_or_else(|| err(1, "missing tab after node id".into()))?;
    let node_id = node.parse::<usize>().map_err(|e| err(1, format!("bad node id `{node}`: {e}")))?;
    let mut entries = Vec::new();
    if !rest.is_empty() {
        for (k, field) in rest.split(',').enumerate() {
            let field_no = k + 2;
            let (id, p) =
                field.split_once(':').ok_or_else(|| err(field_no, format!("expected `id:p`, got `{field}`")))?;
            let id = id.parse::<usize>().map_err(|e| err(field_no, format!("bad hypothesis id `{id}`: {e}")))?;
            let p = p.parse::<f64>().map_err(|e| err(field_no, format!("bad p-value `{p}`: {e}")))?;
            entries.push((id, p));
        }
    }
    PValueReport::new(node_id, entries).map_err(|e| err(0, e.to_string()))
}

pub fn serialize_reports(reports: &[PValueReport]) -> String {
    reports.iter().map(|r| serialize_report(r) + "\n").collect()
}

/// Parses newline-separated records, skipping blank lines.
pub fn parse_reports(text: &str) -> Result<Vec<PValueReport>, WireError> {
    text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| parse_report(l, i + 1)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        let r = PValueReport::new(3, vec![(17, 0.5)]).unwrap();
        assert_eq!(serialize_report(&r), "3\t17:0.5");
        let empty = PValueReport::new(3, vec![]).unwrap();
        assert_eq!(serialize_report(&empty), "3\t");
        assert_eq!(parse_report("3\t", 1).unwrap(), empty);
        let r = PValueReport::new(0, vec![(1, 0.0), (2, 1.0), (5, 1e-300)]).unwrap();
        assert_eq!(serialize_report(&r), "0\t1:0,2:1,5:1e-300");
    }

    #[test]
    fn errors_name_line_and_field() {
        let e = parse_reports("0\t1:0.5\n\n2\t4:0.1,5:x\n").unwrap_err();
        assert_eq!((e.line, e.field), (3, 3));
        let e = parse_report("a\t1:0.5", 7).unwrap_err();
        assert_eq!((e.line, e.field), (7, 1));
        assert_eq!(parse_report("1 1:0.5", 1).unwrap_err().field, 1);
        assert_eq!(parse_report("1\t1-0.5", 1).unwrap_err().field, 2);
        assert!(parse_report("1\t1:1.5", 1).is_err());
        assert!(parse_report("1\t1:0.5,1:0.2", 1).is_err());
    }

    fn report() -> impl Strategy<Value = PValueReport> {
        (0usize..1000, prop::collection::btree_map(0usize..100_000, 0.0..=1.0f64, 0..20))
            .prop_map(|(node, m)| PValueReport::new(node, m.into_iter().collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn round_trip_is_bit_exact(reports in prop::collection::vec(report(), 1..5)) {
            let back = parse_reports(&serialize_reports(&reports)).unwrap();
            prop_assert_eq!(back.len(), reports.len());
            for (a, b) in back.iter().zip(&reports) {
                prop_assert_eq!(a.node_id, b.node_id);
                let bits = |r: &PValueReport| r.entries.iter().map(|&(i, p)| (i, p.to_bits())).collect::<Vec<_>>();
                prop_assert_eq!(bits(a), bits(b));
            }
        }
    }
}
