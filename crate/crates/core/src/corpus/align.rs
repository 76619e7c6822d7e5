use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// 0-based `(source token, target token)` links for one sentence pair.
pub type LinkSet = BTreeSet<(usize, usize)>;

#[derive(Debug, Clone, Copy, Default)]
pub struct AlignmentOptions {
    /// Drop conflicting links so every token participates in at most one,
    /// keeping the lexicographically first `(i, j)`.
    pub one_to_one: bool,
}

pub fn read_alignments(path: &Path, options: AlignmentOptions) -> Result<Vec<LinkSet>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
    read_alignments_from_str(&text, path, options)
}

pub fn read_alignments_from_str(
    text: &str,
    path: &Path,
    options: AlignmentOptions,
) -> Result<Vec<LinkSet>> {
    text.lines()
        .enumerate()
        .map(|(i, line)| {
            let links = parse_line(line, i + 1, path)?;
            Ok(if options.one_to_one {
                one_to_one(&links)
            } else {
                links
            })
        })
        .collect()
}

fn parse_line(line: &str, line_no: usize, path: &Path) -> Result<LinkSet> {
    let err = |message: String| Error::Parse {
        path: PathBuf::from(path),
        line: line_no,
        message,
    };
    line.split_whitespace()
        .map(|item| {
            let (i, j) = item
                .split_once('-')
                .ok_or_else(|| err(format!("malformed link {item:?}")))?;
            let i: usize = i
                .parse()
                .map_err(|_| err(format!("bad source index in {item:?}")))?;
            let j: usize = j
                .parse()
                .map_err(|_| err(format!("bad target index in {item:?}")))?;
            Ok((i, j))
        })
        .collect()
}

/// Keeps a link only if neither endpoint was taken by an earlier link in
/// `(i, j)` order.
pub(crate) fn one_to_one(links: &LinkSet) -> LinkSet {
    let mut used_i = BTreeSet::new();
    let mut used_j = BTreeSet::new();
    links
        .iter()
        .copied()
        .filter(|&(i, j)| {
            if used_i.contains(&i) || used_j.contains(&j) {
                false
            } else {
                used_i.insert(i);
                used_j.insert(j);
                true
            }
        })
        .collect()
}
