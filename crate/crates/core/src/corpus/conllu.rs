//! Minimal CoNLL-U reader and writer.
//!
//! Only the columns the toolkit consumes are kept: ID, FORM, LEMMA, UPOS/XPOS,
//! HEAD and DEPREL. Multiword-token ranges (`1-2`) and empty nodes (`1.1`) are
//! skipped.

use std::fmt::Write as _;

use super::{ParsedSentence, Token};

/// One sentence block as read from a CoNLL-U stream.
#[derive(Debug, Clone)]
pub struct Block {
    pub sent_id: Option<String>,
    pub text: Option<String>,
    pub tokens: Vec<Token>,
    /// 1-based line number of the first line of the block.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockError {
    pub line: usize,
    pub reason: String,
}

/// Splits `input` into sentence blocks. Malformed token lines invalidate the
/// block they belong to; the remaining blocks are still returned.
pub fn read_blocks(input: &str) -> (Vec<Block>, Vec<BlockError>) {
    let mut blocks = Vec::new();
    let mut errors = Vec::new();
    let mut current: Option<(Block, Option<BlockError>)> = None;

    let flush = |cur: &mut Option<(Block, Option<BlockError>)>,
                     blocks: &mut Vec<Block>,
                     errors: &mut Vec<BlockError>| {
        if let Some((block, err)) = cur.take() {
            match err {
                Some(e) => errors.push(e),
                None if block.tokens.is_empty() && block.sent_id.is_none() => {}
                None => blocks.push(block),
            }
        }
    };

    for (i, raw) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut current, &mut blocks, &mut errors);
            continue;
        }
        let (block, err) = current.get_or_insert_with(|| {
            (
                Block {
                    sent_id: None,
                    text: None,
                    tokens: Vec::new(),
                    line: lineno,
                },
                None,
            )
        });
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                match key.trim() {
                    "sent_id" => block.sent_id = Some(value.trim().to_string()),
                    "text" => block.text = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            continue;
        }
        if err.is_some() {
            continue;
        }
        match parse_token_line(line) {
            Ok(Some(tok)) => block.tokens.push(tok),
            Ok(None) => {}
            Err(reason) => {
                *err = Some(BlockError {
                    line: lineno,
                    reason: match &block.sent_id {
                        Some(id) => format!("{id}: {reason}"),
                        None => reason,
                    },
                })
            }
        }
    }
    flush(&mut current, &mut blocks, &mut errors);
    (blocks, errors)
}

fn parse_token_line(line: &str) -> Result<Option<Token>, String> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(format!("expected 10 tab-separated columns, found {}", cols.len()));
    }
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let index: usize = cols[0]
        .parse()
        .map_err(|_| format!("bad token id {:?}", cols[0]))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| format!("bad head {:?} for token {index}", cols[6]))?;
    let pos_tag = if cols[4] != "_" { cols[4] } else { cols[3] };
    Ok(Some(Token {
        index,
        surface: cols[1].to_string(),
        lemma: cols[2].to_string(),
        pos_tag: pos_tag.to_string(),
        head,
        dep_label: cols[7].to_string(),
    }))
}

/// Renders one sentence as a CoNLL-U block, including the trailing blank line.
/// The tag is written to both UPOS and XPOS so that reading it back recovers it.
pub fn write_sentence(out: &mut String, sentence: &ParsedSentence) {
    let _ = writeln!(out, "# sent_id = {}", sentence.id);
    let _ = writeln!(out, "# text = {}", sentence.raw_text);
    for t in &sentence.tokens {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t_\t{}\t{}\t_\t_",
            t.index,
            t.surface,
            if t.lemma.is_empty() { "_" } else { &t.lemma },
            t.pos_tag,
            t.pos_tag,
            t.head,
            t.dep_label
        );
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "# sent_id = p1:q:0\n# text = Why?\n1\tWhy\twhy\tADV\tWRB\t_\t0\troot\t_\t_\n2\t?\t?\tPUNCT\t.\t_\t1\tpunct\t_\t_\n\n";

    #[test]
    fn reads_block() {
        let (blocks, errors) = read_blocks(SAMPLE);
        assert!(errors.is_empty());
        assert_eq!(blocks.len(), 1);
        let b = &blocks[0];
        assert_eq!(b.sent_id.as_deref(), Some("p1:q:0"));
        assert_eq!(b.text.as_deref(), Some("Why?"));
        assert_eq!(b.tokens[0].pos_tag, "WRB");
        assert_eq!(b.tokens[1].head, 1);
    }

    #[test]
    fn skips_multiword_ranges() {
        let input = "# sent_id = x\n1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n1\tdo\tdo\tAUX\tVBP\t_\t0\troot\t_\t_\n2\tn't\tnot\tPART\tRB\t_\t1\tneg\t_\t_\n";
        let (blocks, errors) = read_blocks(input);
        assert!(errors.is_empty());
        assert_eq!(blocks[0].tokens.len(), 2);
    }

    #[test]
    fn bad_column_count_is_reported_with_line() {
        let input = "# sent_id = a\n1\tWhy\n\n# sent_id = b\n1\tWhy\twhy\tADV\tWRB\t_\t0\troot\t_\t_\n";
        let (blocks, errors) = read_blocks(input);
        assert_eq!(blocks.len(), 1);
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].line, 2);
    }
}
