use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Token;
use crate::error::{Error, Result};

const ID: usize = 0;
const FORM: usize = 1;
const LEMMA: usize = 2;
const PLEMMA: usize = 3;
const POS: usize = 4;
const PPOS: usize = 5;
const FEAT: usize = 6;
const PFEAT: usize = 7;
const HEAD: usize = 8;
const PHEAD: usize = 9;
const DEPREL: usize = 10;
const PDEPREL: usize = 11;
const FILLPRED: usize = 12;
const PRED: usize = 13;
const FIXED_COLUMNS: usize = 14;

/// Which half of the paired CoNLL-2009 columns to read lemma, POS, features,
/// head and relation from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnProfile {
    #[default]
    Gold,
    Predicted,
}

impl ColumnProfile {
    fn columns(self) -> [usize; 5] {
        match self {
            ColumnProfile::Gold => [LEMMA, POS, FEAT, HEAD, DEPREL],
            ColumnProfile::Predicted => [PLEMMA, PPOS, PFEAT, PHEAD, PDEPREL],
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConllOptions {
    pub profile: ColumnProfile,
}

/// A FILLPRED-marked predicate and its APRED column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateInstance {
    pub position: usize,
    pub sense: String,
    /// `(head position, gold role)` for every non-`_` cell of the predicate's
    /// APRED column.
    pub arguments: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    /// Line number of the first token row.
    pub line: usize,
    pub tokens: Vec<Token>,
    pub predicates: Vec<PredicateInstance>,
}

impl Sentence {
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }
}

pub fn read_conll(path: &Path, options: &ConllOptions) -> Result<Vec<Sentence>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    read_conll_from_str(&text, path, options)
}

/// Parses CoNLL-2009 text; `path` is only used in error messages.
pub fn read_conll_from_str(
    text: &str,
    path: &Path,
    options: &ConllOptions,
) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            if !rows.is_empty() {
                sentences.push(build_sentence(std::mem::take(&mut rows), path, options)?);
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() < FIXED_COLUMNS {
            return Err(parse_err(
                path,
                line_no,
                format!("expected at least {FIXED_COLUMNS} columns, found {}", cols.len()),
            ));
        }
        rows.push((line_no, cols));
    }
    if !rows.is_empty() {
        sentences.push(build_sentence(rows, path, options)?);
    }
    Ok(sentences)
}

fn parse_err(path: &Path, line: usize, message: String) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message,
    }
}

fn build_sentence(
    rows: Vec<(usize, Vec<&str>)>,
    path: &Path,
    options: &ConllOptions,
) -> Result<Sentence> {
    let [lemma_c, pos_c, feat_c, head_c, deprel_c] = options.profile.columns();
    let first_line = rows[0].0;
    let n_preds = rows.iter().filter(|(_, c)| c[FILLPRED] == "Y").count();
    let expected = FIXED_COLUMNS + n_preds;

    let mut tokens = Vec::with_capacity(rows.len());
    let mut pred_rows = Vec::with_capacity(n_preds);
    for (pos, (line, cols)) in rows.iter().enumerate() {
        if cols.len() != expected {
            return Err(parse_err(
                path,
                *line,
                format!(
                    "expected {expected} columns ({n_preds} predicates), found {}",
                    cols.len()
                ),
            ));
        }
        let index: usize = cols[ID]
            .parse()
            .map_err(|_| parse_err(path, *line, format!("bad token id {:?}", cols[ID])))?;
        if index != pos + 1 {
            return Err(parse_err(
                path,
                *line,
                format!("token id {index} out of sequence (expected {})", pos + 1),
            ));
        }
        let head: usize = cols[head_c]
            .parse()
            .map_err(|_| parse_err(path, *line, format!("bad head {:?}", cols[head_c])))?;
        let feats = match cols[feat_c] {
            "_" | "" => Vec::new(),
            s => s.split('|').map(str::to_string).collect(),
        };
        tokens.push(Token {
            index,
            form: cols[FORM].to_string(),
            lemma: cols[lemma_c].to_string(),
            pos: cols[pos_c].to_string(),
            head,
            deprel: cols[deprel_c].to_string(),
            feats,
        });
        if cols[FILLPRED] == "Y" {
            pred_rows.push((index, cols[PRED].to_string()));
        }
    }
    let len = tokens.len();
    if let Some(t) = tokens.iter().find(|t| t.head > len) {
        return Err(Error::Structure {
            path: PathBuf::from(path),
            line: first_line,
            message: format!(
                "token {} has head {} beyond sentence length {len}",
                t.index, t.head
            ),
        });
    }

    let predicates = pred_rows
        .into_iter()
        .enumerate()
        .map(|(k, (position, sense))| {
            let col = FIXED_COLUMNS + k;
            let arguments = rows
                .iter()
                .enumerate()
                .filter(|(_, (_, c))| c[col] != "_")
                .map(|(i, (_, c))| (i + 1, c[col].to_string()))
                .collect();
            PredicateInstance {
                position,
                sense,
                arguments,
            }
        })
        .collect();

    Ok(Sentence {
        line: first_line,
        tokens,
        predicates,
    })
}

/// External argument identification output: which tokens are arguments of
/// which predicate, without labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarEntry {
    /// 0-based sentence index within the CoNLL file.
    pub sentence: usize,
    pub predicate_position: usize,
    pub heads: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SidecarFile {
    pub version: u32,
    pub entries: Vec<SidecarEntry>,
}

pub fn read_sidecar(path: &Path) -> Result<SidecarFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    let file: SidecarFile = serde_json::from_str(&text)
        .map_err(|e| Error::json(format!("parsing {}", path.display()), e))?;
    if file.version != 1 {
        return Err(Error::Data(format!(
            "{}: unsupported sidecar version {}",
            path.display(),
            file.version
        )));
    }
    Ok(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(cols: &[&str]) -> String {
        cols.join("\t")
    }

    fn two_token() -> String {
        [
            row(&["1", "Mike", "mike", "mike", "NNP", "NNP", "_", "_", "2", "2", "SBJ", "SBJ", "_", "_", "A0"]),
            row(&["2", "wrote", "write", "write", "VBD", "VBD", "_", "_", "0", "0", "ROOT", "ROOT", "Y", "write.01", "_"]),
        ]
        .join("\n")
    }

    #[test]
    fn reads_minimal_sentence() {
        let s = read_conll_from_str(&two_token(), Path::new("t"), &ConllOptions::default()).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].tokens.len(), 2);
        assert_eq!(s[0].predicates.len(), 1);
        assert_eq!(s[0].predicates[0].position, 2);
        assert_eq!(s[0].predicates[0].arguments, vec![(1, "A0".to_string())]);
    }

    #[test]
    fn empty_input_is_empty() {
        let s = read_conll_from_str("", Path::new("t"), &ConllOptions::default()).unwrap();
        assert!(s.is_empty());
        let s = read_conll_from_str("\n\n", Path::new("t"), &ConllOptions::default()).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn short_row_reports_line() {
        let text = format!("{}\n1\tx\n", two_token());
        let err = read_conll_from_str(&text, Path::new("f.conll"), &ConllOptions::default())
            .unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn missing_apred_column_is_parse_error() {
        let text = [
            row(&["1", "Mike", "mike", "mike", "NNP", "NNP", "_", "_", "2", "2", "SBJ", "SBJ", "_", "_"]),
            row(&["2", "wrote", "write", "write", "VBD", "VBD", "_", "_", "0", "0", "ROOT", "ROOT", "Y", "write.01", "_"]),
        ]
        .join("\n");
        let err = read_conll_from_str(&text, Path::new("f"), &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn dangling_head_is_structural_error() {
        let text = two_token().replacen("\t2\t2\tSBJ", "\t7\t7\tSBJ", 1);
        let err = read_conll_from_str(&text, Path::new("f"), &ConllOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Structure { .. }), "{err}");
    }

    #[test]
    fn predicted_profile_reads_p_columns() {
        let text = two_token().replacen("\tSBJ\tSBJ", "\tSBJ\tOBJ", 1);
        let opts = ConllOptions {
            profile: ColumnProfile::Predicted,
        };
        let s = read_conll_from_str(&text, Path::new("t"), &opts).unwrap();
        assert_eq!(s[0].tokens[0].deprel, "OBJ");
    }
}
