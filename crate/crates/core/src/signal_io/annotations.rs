use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Ictal interval for one recording file, in seconds from file start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeizureAnnotation {
    pub file_id: String,
    pub t_s: f64,
    pub t_e: f64,
}

impl SeizureAnnotation {
    pub fn duration_s(&self) -> f64 {
        self.t_e - self.t_s
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AnnotationError {
    #[error("line {line}: expected 3 fields `file_id,start_s,end_s`, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: {field} is not a number: {value:?}")]
    NotNumeric {
        line: usize,
        field: &'static str,
        value: String,
    },
}

/// A row that parsed but describes an impossible interval.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectedAnnotation {
    pub line: usize,
    pub file_id: String,
    pub t_s: f64,
    pub t_e: f64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnnotationSet {
    pub accepted: Vec<SeizureAnnotation>,
    pub rejected: Vec<RejectedAnnotation>,
}

impl AnnotationSet {
    pub fn for_file<'a>(&'a self, file_id: &'a str) -> impl Iterator<Item = &'a SeizureAnnotation> + 'a {
        self.accepted.iter().filter(move |a| a.file_id == file_id)
    }
}

/// Parses `file_id,start_s,end_s` rows. A first line whose time fields are
/// not numeric is taken as a header. Rows with `end <= start` or a negative
/// start are rejected individually rather than corrected.
pub fn load_annotations(text: &str) -> Result<AnnotationSet, AnnotationError> {
    let mut set = AnnotationSet::default();
    let mut first = true;
    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw_line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(AnnotationError::FieldCount {
                line: line_no,
                found: fields.len(),
            });
        }
        let is_header = first && fields[1].parse::<f64>().is_err() && fields[2].parse::<f64>().is_err();
        first = false;
        if is_header {
            continue;
        }
        let parse = |s: &str, field: &'static str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| AnnotationError::NotNumeric {
                    line: line_no,
                    field,
                    value: s.to_string(),
                })
        };
        let t_s = parse(fields[1], "start_s")?;
        let t_e = parse(fields[2], "end_s")?;
        let file_id = fields[0].to_string();
        let reason = if t_s < 0.0 {
            Some(format!("negative start time {t_s}"))
        } else if t_e <= t_s {
            Some(format!("end {t_e} s does not follow start {t_s} s"))
        } else {
            None
        };
        match reason {
            Some(reason) => {
                log::warn!("annotation line {line_no} ({file_id}) rejected: {reason}");
                set.rejected.push(RejectedAnnotation {
                    line: line_no,
                    file_id,
                    t_s,
                    t_e,
                    reason,
                });
            }
            None => set.accepted.push(SeizureAnnotation { file_id, t_s, t_e }),
        }
    }
    Ok(set)
}

pub fn write_annotations(annotations: &[SeizureAnnotation]) -> String {
    let mut out = String::from("file_id,start_s,end_s\n");
    for a in annotations {
        out.push_str(&format!("{},{},{}\n", a.file_id, a.t_s, a.t_e));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chb01_03() {
        let set = load_annotations("chb01_03.edf,2996,3036").unwrap();
        assert_eq!(
            set.accepted,
            vec![SeizureAnnotation {
                file_id: "chb01_03.edf".into(),
                t_s: 2996.0,
                t_e: 3036.0
            }]
        );
    }

    #[test]
    fn zero_length_rejected() {
        let set = load_annotations("f.edf,10,10").unwrap();
        assert!(set.accepted.is_empty());
        assert_eq!(set.rejected.len(), 1);
        assert_eq!(set.rejected[0].line, 1);
    }

    #[test]
    fn chb05_13_spans_110_s() {
        let set = load_annotations("chb05_13.edf,1086,1196").unwrap();
        assert_eq!(set.accepted[0].duration_s(), 110.0);
    }

    #[test]
    fn reversed_row_is_reported_and_rest_kept_in_order() {
        let text = "file_id,start_s,end_s\r\nchb03_02.edf,731,796\r\nchb04_28.edf,1679,178\r\nchb08_02.edf,2670,2841\r\n";
        let set = load_annotations(text).unwrap();
        let ids: Vec<_> = set.accepted.iter().map(|a| a.file_id.as_str()).collect();
        assert_eq!(ids, ["chb03_02.edf", "chb08_02.edf"]);
        assert_eq!(set.rejected[0].file_id, "chb04_28.edf");
        assert_eq!(set.rejected[0].line, 3);
    }

    #[test]
    fn empty_and_errors() {
        assert_eq!(load_annotations("").unwrap(), AnnotationSet::default());
        assert!(matches!(
            load_annotations("a.edf,1,x"),
            Err(AnnotationError::NotNumeric { line: 1, field: "end_s", .. })
        ));
        assert!(matches!(
            load_annotations("a.edf,1,2\nb.edf,x,4"),
            Err(AnnotationError::NotNumeric { line: 2, field: "start_s", .. })
        ));
        assert!(matches!(load_annotations("a.edf,1"), Err(AnnotationError::FieldCount { .. })));
    }

    #[test]
    fn write_then_load() {
        let a = vec![SeizureAnnotation { file_id: "s.edf".into(), t_s: 20.5, t_e: 30.0 }];
        assert_eq!(load_annotations(&write_annotations(&a)).unwrap().accepted, a);
    }
}
