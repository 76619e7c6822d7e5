use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::corpus::Frame;
use crate::error::{Error, Result};
use crate::model::{FrameAssignment, RoleSpace};

const HEADER: &str = "# sri-labels 1";

/// Placeholder for an argument without a label.
pub const NO_LABEL: &str = "_";

/// Per-frame argument labels of one language, keyed by frame id.
///
/// On disk this is a tab-separated file: a header line, a `language` line,
/// then one line per frame with the frame id and its space-separated labels.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabelSet {
    pub language: String,
    pub frames: BTreeMap<String, Vec<String>>,
}

impl LabelSet {
    pub fn new(language: impl Into<String>) -> Self {
        LabelSet {
            language: language.into(),
            frames: BTreeMap::new(),
        }
    }

    /// Gold roles of `frames`, with [`NO_LABEL`] for unlabeled arguments.
    pub fn gold<'a>(language: &str, frames: impl IntoIterator<Item = &'a Frame>) -> Self {
        let mut out = LabelSet::new(language);
        for f in frames {
            let labels = f
                .arguments
                .iter()
                .map(|a| a.gold_role.clone().unwrap_or_else(|| NO_LABEL.to_string()))
                .collect();
            out.frames.insert(f.id.clone(), labels);
        }
        out
    }

    pub fn from_assignments<'a>(
        language: &str,
        frames: impl IntoIterator<Item = &'a Frame>,
        assignments: &[FrameAssignment],
    ) -> Result<Self> {
        let mut out = LabelSet::new(language);
        let mut it = assignments.iter();
        for f in frames {
            let a = it
                .next()
                .ok_or_else(|| Error::Contract("fewer assignments than frames".into()))?;
            if a.roles.len() != f.arguments.len() {
                return Err(Error::Contract(format!("frame {}: assignment length mismatch", f.id)));
            }
            out.frames
                .insert(f.id.clone(), a.roles.iter().map(|r| r.to_string()).collect());
        }
        if it.next().is_some() {
            return Err(Error::Contract("more assignments than frames".into()));
        }
        Ok(out)
    }

    /// Labels of `frame`, checked against its argument count.
    pub fn labels_of(&self, frame: &Frame) -> Result<&[String]> {
        let l = self
            .frames
            .get(&frame.id)
            .ok_or_else(|| Error::Data(format!("no labels for frame {}", frame.id)))?;
        if l.len() != frame.arguments.len() {
            return Err(Error::Data(format!(
                "frame {}: {} labels for {} arguments",
                frame.id,
                l.len(),
                frame.arguments.len()
            )));
        }
        Ok(l)
    }

    /// Role assignment of `frame` when its labels are role names of `space`.
    pub fn assignment_of(&self, frame: &Frame, space: &RoleSpace) -> Result<FrameAssignment> {
        let roles = self
            .labels_of(frame)?
            .iter()
            .map(|s| {
                let l = s.parse()?;
                space
                    .index(l)
                    .map(|_| l)
                    .ok_or_else(|| Error::Data(format!("frame {}: {s} is outside the role space", frame.id)))
            })
            .collect::<Result<_>>()?;
        Ok(FrameAssignment::new(roles))
    }

    pub fn to_tsv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        let _ = writeln!(s, "language\t{}", self.language);
        for (id, labels) in &self.frames {
            let _ = writeln!(s, "{id}\t{}", labels.join(" "));
        }
        s
    }

    pub fn from_tsv(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, message: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == HEADER => {}
            _ => return Err(err(1, format!("expected header {HEADER:?}"))),
        }
        let language = match lines.next().map(|(_, l)| l.split_once('\t')) {
            Some(Some(("language", lang))) => lang.trim().to_string(),
            _ => return Err(err(2, "expected a language line".into())),
        };
        let mut out = LabelSet::new(language);
        for (i, line) in lines {
            if line.is_empty() {
                continue;
            }
            let (id, rest) = line
                .split_once('\t')
                .ok_or_else(|| err(i + 1, "expected frame id and labels separated by a tab".into()))?;
            let labels = rest.split_whitespace().map(str::to_string).collect();
            if out.frames.insert(id.to_string(), labels).is_some() {
                return Err(err(i + 1, format!("duplicate frame id {id}")));
            }
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_tsv()).map_err(|e| Error::io(format!("writing {}", path.display()), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_tsv(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tsv_roundtrip() {
        let mut l = LabelSet::new("en");
        l.frames.insert("a".into(), vec!["P1".into(), "S2".into()]);
        l.frames.insert("b".into(), vec![]);
        let back = LabelSet::from_tsv(&l.to_tsv(), Path::new("x")).unwrap();
        assert_eq!(back, l);
    }

    #[test]
    fn bad_header_is_parse_error() {
        let r = LabelSet::from_tsv("language\ten\n", Path::new("x"));
        assert!(matches!(r, Err(Error::Parse { line: 1, .. })));
    }
}
