//! Pre-parsed corpora, candidate pair instances and document-level folds.
//!
//! Corpus TSV, one token per line, blank line between sentences:
//!
//! ```text
//! doc_id  sent_id  token_idx  surface  pos  chunk  entity_role  head_idx  dep_label
//! ```
//!
//! `head_idx` is 0-based or the literal `ROOT`. Instance TSV:
//!
//! ```text
//! instance_id  doc_id  sent_id  p1_start  p1_end  p2_start  p2_end  {PPI|OTHER}  [difficult{0|1}]
//! ```
//!
//! with inclusive token ranges.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EntityRole {
    Prot1,
    Prot2,
    Prot,
    O,
}

impl EntityRole {
    pub const ALL: [EntityRole; 4] = [
        EntityRole::Prot1,
        EntityRole::Prot2,
        EntityRole::Prot,
        EntityRole::O,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityRole::Prot1 => "PROT1",
            EntityRole::Prot2 => "PROT2",
            EntityRole::Prot => "PROT",
            EntityRole::O => "O",
        }
    }

    pub fn is_protein(self) -> bool {
        self != EntityRole::O
    }
}

impl FromStr for EntityRole {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "PROT1" => Ok(EntityRole::Prot1),
            "PROT2" => Ok(EntityRole::Prot2),
            "PROT" => Ok(EntityRole::Prot),
            "O" => Ok(EntityRole::O),
            other => Err(format!("unknown entity role {:?}", other)),
        }
    }
}

impl fmt::Display for EntityRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Incoming dependency edge source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Head {
    Root,
    Token(usize),
}

impl fmt::Display for Head {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Head::Root => f.write_str("ROOT"),
            Head::Token(i) => write!(f, "{}", i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub surface: String,
    pub pos: String,
    pub chunk: String,
    pub entity_role: EntityRole,
    pub head: Head,
    pub dep_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedSentence {
    pub doc_id: String,
    pub sent_id: String,
    pub tokens: Vec<AnnotatedToken>,
}

impl AnnotatedSentence {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Checks head bounds, self-loops, ROOT consistency and non-empty labels.
    pub fn validate(&self) -> Result<()> {
        let structural = |message: String| Error::Structure {
            sent_id: self.sent_id.clone(),
            message,
        };
        if self.tokens.is_empty() {
            return Err(structural("sentence has no tokens".into()));
        }
        let mut roots = 0;
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.dep_label.is_empty() {
                return Err(structural(format!(
                    "token {} has an empty dependency label",
                    i
                )));
            }
            match tok.head {
                Head::Root => {
                    if tok.dep_label != "ROOT" {
                        return Err(structural(format!(
                            "token {} has head ROOT but label {:?}",
                            i, tok.dep_label
                        )));
                    }
                    roots += 1;
                }
                Head::Token(h) => {
                    if h >= self.tokens.len() {
                        return Err(structural(format!(
                            "token {} has head {} outside a {}-token sentence",
                            i,
                            h,
                            self.tokens.len()
                        )));
                    }
                    if h == i {
                        return Err(structural(format!("token {} is its own head", i)));
                    }
                    if tok.dep_label == "ROOT" {
                        return Err(structural(format!(
                            "token {} is labeled ROOT but has head {}",
                            i, h
                        )));
                    }
                }
            }
        }
        if roots == 0 {
            return Err(structural("no token is attached to ROOT".into()));
        }
        Ok(())
    }

    /// Maximal runs of protein-tagged tokens.
    pub fn mentions(&self) -> Vec<Span> {
        let mut spans = Vec::new();
        let mut start = None;
        for (i, tok) in self.tokens.iter().enumerate() {
            match (tok.entity_role.is_protein(), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    spans.push(Span::new(s, i - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            spans.push(Span::new(s, self.tokens.len() - 1));
        }
        spans
    }
}

/// Inclusive token range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.start <= i && i <= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    /// Signed distance from token `i` to the nearest token of the span,
    /// positive when `i` lies after the span.
    pub fn distance_from(&self, i: usize) -> i64 {
        if i < self.start {
            i as i64 - self.start as i64
        } else if i > self.end {
            i as i64 - self.end as i64
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Ppi,
    Other,
}

impl Label {
    /// Column of this label in the two-way probability vector.
    pub fn index(self) -> usize {
        match self {
            Label::Ppi => 0,
            Label::Other => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Ppi => "PPI",
            Label::Other => "OTHER",
        }
    }
}

impl FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "PPI" => Ok(Label::Ppi),
            "OTHER" => Ok(Label::Other),
            other => Err(format!("unknown label {:?}", other)),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One candidate protein pair. The sentence copy has its entity roles
/// rewritten for this pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PpiInstance {
    pub instance_id: String,
    pub sentence: AnnotatedSentence,
    pub prot1: Span,
    pub prot2: Span,
    pub label: Label,
    pub difficult: bool,
}

impl PpiInstance {
    pub fn new(
        instance_id: impl Into<String>,
        sentence: &AnnotatedSentence,
        prot1: Span,
        prot2: Span,
        label: Label,
    ) -> Self {
        let mut sentence = sentence.clone();
        for (i, tok) in sentence.tokens.iter_mut().enumerate() {
            tok.entity_role = if prot1.contains(i) {
                EntityRole::Prot1
            } else if prot2.contains(i) {
                EntityRole::Prot2
            } else if tok.entity_role.is_protein() {
                EntityRole::Prot
            } else {
                EntityRole::O
            };
        }
        PpiInstance {
            instance_id: instance_id.into(),
            sentence,
            prot1,
            prot2,
            label,
            difficult: false,
        }
    }

    pub fn doc_id(&self) -> &str {
        &self.sentence.doc_id
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<AnnotatedSentence>> {
    parse_corpus(&read_to_string(path.as_ref())?)
}

pub fn parse_corpus(text: &str) -> Result<Vec<AnnotatedSentence>> {
    let mut sentences = Vec::new();
    let mut current: Option<AnnotatedSentence> = None;

    let finish = |sentence: Option<AnnotatedSentence>, out: &mut Vec<AnnotatedSentence>| {
        if let Some(s) = sentence {
            s.validate()?;
            out.push(s);
        }
        Ok::<_, Error>(())
    };

    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        if line.trim().is_empty() {
            finish(current.take(), &mut sentences)?;
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            return Err(Error::parse(
                lineno,
                format!("expected 9 tab-separated fields, found {}", fields.len()),
            ));
        }
        let token_idx: usize = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad token index {:?}", fields[2])))?;
        let entity_role = fields[6].parse().map_err(|e| Error::parse(lineno, e))?;
        let head = match fields[7] {
            "ROOT" => Head::Root,
            h => Head::Token(
                h.parse()
                    .map_err(|_| Error::parse(lineno, format!("bad head index {:?}", h)))?,
            ),
        };

        let same = current
            .as_ref()
            .map(|s| s.doc_id == fields[0] && s.sent_id == fields[1])
            .unwrap_or(false);
        if !same {
            finish(current.take(), &mut sentences)?;
            current = Some(AnnotatedSentence {
                doc_id: fields[0].to_string(),
                sent_id: fields[1].to_string(),
                tokens: Vec::new(),
            });
        }
        let sentence = current.as_mut().expect("sentence started above");
        if token_idx != sentence.tokens.len() {
            return Err(Error::parse(
                lineno,
                format!(
                    "token index {} out of sequence, expected {}",
                    token_idx,
                    sentence.tokens.len()
                ),
            ));
        }
        sentence.tokens.push(AnnotatedToken {
            surface: fields[3].to_string(),
            pos: fields[4].to_string(),
            chunk: fields[5].to_string(),
            entity_role,
            head,
            dep_label: fields[8].to_string(),
        });
    }
    finish(current.take(), &mut sentences)?;
    Ok(sentences)
}

pub fn write_corpus(sentences: &[AnnotatedSentence]) -> String {
    let mut out = String::new();
    for s in sentences {
        for (i, t) in s.tokens.iter().enumerate() {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                s.doc_id,
                s.sent_id,
                i,
                t.surface,
                t.pos,
                t.chunk,
                t.entity_role,
                t.head,
                t.dep_label
            ));
        }
        out.push('\n');
    }
    out
}

/// All unordered pairs of distinct mentions per sentence, labeled OTHER.
///
/// Mentions are maximal runs of protein-tagged tokens.
pub fn make_instances(sentences: &[AnnotatedSentence]) -> Vec<PpiInstance> {
    let mut out = Vec::new();
    for s in sentences {
        let mentions = s.mentions();
        for (i, a) in mentions.iter().enumerate() {
            for (j, b) in mentions.iter().enumerate().skip(i + 1) {
                let id = format!("{}.p{}.p{}", s.sent_id, i, j);
                out.push(PpiInstance::new(id, s, *a, *b, Label::Other));
            }
        }
    }
    out
}

/// Reads labeled pairs against already loaded sentences.
///
/// Pairs whose two spans coincide or overlap are self-interactions and are
/// dropped.
pub fn load_instances(
    path: impl AsRef<Path>,
    sentences: &[AnnotatedSentence],
) -> Result<Vec<PpiInstance>> {
    parse_instances(&read_to_string(path.as_ref())?, sentences)
}

pub fn parse_instances(text: &str, sentences: &[AnnotatedSentence]) -> Result<Vec<PpiInstance>> {
    let index: HashMap<(&str, &str), &AnnotatedSentence> = sentences
        .iter()
        .map(|s| ((s.doc_id.as_str(), s.sent_id.as_str()), s))
        .collect();
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let lineno = n + 1;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 8 && f.len() != 9 {
            return Err(Error::parse(
                lineno,
                format!("expected 8 or 9 tab-separated fields, found {}", f.len()),
            ));
        }
        let num = |s: &str| -> Result<usize> {
            s.parse()
                .map_err(|_| Error::parse(lineno, format!("bad token index {:?}", s)))
        };
        let sentence = index.get(&(f[1], f[2])).ok_or_else(|| Error::Structure {
            sent_id: f[2].to_string(),
            message: format!("instance {} refers to an unknown sentence", f[0]),
        })?;
        let p1 = Span::new(num(f[3])?, num(f[4])?);
        let p2 = Span::new(num(f[5])?, num(f[6])?);
        for span in [p1, p2] {
            if span.start > span.end || span.end >= sentence.len() {
                return Err(Error::parse(
                    lineno,
                    format!(
                        "span {}..={} invalid for a {}-token sentence",
                        span.start,
                        span.end,
                        sentence.len()
                    ),
                ));
            }
        }
        let label = f[7].parse().map_err(|e| Error::parse(lineno, e))?;
        let difficult = match f.get(8) {
            None | Some(&"0") => false,
            Some(&"1") => true,
            Some(other) => {
                return Err(Error::parse(
                    lineno,
                    format!("difficult flag must be 0 or 1, found {:?}", other),
                ))
            }
        };
        if p1.overlaps(&p2) {
            continue;
        }
        let mut inst = PpiInstance::new(f[0], sentence, p1, p2, label);
        inst.difficult = difficult;
        out.push(inst);
    }
    Ok(out)
}

pub fn write_instances(instances: &[PpiInstance]) -> String {
    let mut out = String::new();
    for i in instances {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            i.instance_id,
            i.sentence.doc_id,
            i.sentence.sent_id,
            i.prot1.start,
            i.prot1.end,
            i.prot2.start,
            i.prot2.end,
            i.label,
            if i.difficult { 1 } else { 0 }
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: BTreeSet<String>,
    pub test: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.folds.len()
    }

    /// Test sets must partition `docs`; train and test must not share a document.
    pub fn validate(&self, docs: &BTreeSet<String>) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, fold) in self.folds.iter().enumerate() {
            if let Some(d) = fold.train.intersection(&fold.test).next() {
                return Err(Error::Config(format!(
                    "fold {} has document {} in both train and test",
                    i, d
                )));
            }
            for d in &fold.test {
                if !seen.insert(d.clone()) {
                    return Err(Error::Config(format!(
                        "document {} is tested in more than one fold",
                        d
                    )));
                }
            }
        }
        if &seen != docs {
            let missing: Vec<_> = docs.difference(&seen).cloned().collect();
            let extra: Vec<_> = seen.difference(docs).cloned().collect();
            return Err(Error::Config(format!(
                "fold test sets do not cover the corpus (missing {:?}, unknown {:?})",
                missing, extra
            )));
        }
        Ok(())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, fold) in self.folds.iter().enumerate() {
            for d in &fold.train {
                out.push_str(&format!("{}\t{}\ttrain\n", i, d));
            }
            for d in &fold.test {
                out.push_str(&format!("{}\t{}\ttest\n", i, d));
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<FoldPlan> {
        let mut folds: BTreeMap<usize, Fold> = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 3 {
                return Err(Error::parse(
                    n + 1,
                    "expected fold_index, doc_id, train|test",
                ));
            }
            let idx: usize = f[0]
                .parse()
                .map_err(|_| Error::parse(n + 1, format!("bad fold index {:?}", f[0])))?;
            let fold = folds.entry(idx).or_insert_with(|| Fold {
                train: BTreeSet::new(),
                test: BTreeSet::new(),
            });
            match f[2] {
                "train" => fold.train.insert(f[1].to_string()),
                "test" => fold.test.insert(f[1].to_string()),
                other => {
                    return Err(Error::parse(
                        n + 1,
                        format!("expected train|test, found {:?}", other),
                    ))
                }
            };
        }
        if folds.keys().copied().ne(0..folds.len()) {
            return Err(Error::Format(
                "fold indices must be contiguous from 0".into(),
            ));
        }
        Ok(FoldPlan {
            folds: folds.into_values().collect(),
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FoldPlan> {
        FoldPlan::parse(&read_to_string(path.as_ref())?)
    }
}

pub fn doc_ids<'a>(docs: impl IntoIterator<Item = &'a str>) -> BTreeSet<String> {
    docs.into_iter().map(str::to_string).collect()
}

/// Document-level k-fold split. Documents are shuffled with `seed` and dealt
/// round-robin, so test set sizes differ by at most one document.
pub fn split_folds(instances: &[PpiInstance], k: usize, seed: u64) -> Result<FoldPlan> {
    split_docs(&doc_ids(instances.iter().map(|i| i.doc_id())), k, seed)
}

pub fn split_docs(docs: &BTreeSet<String>, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::Config(format!("k must be at least 2, got {}", k)));
    }
    if docs.len() < k {
        return Err(Error::Config(format!(
            "{} documents cannot be split into {} folds",
            docs.len(),
            k
        )));
    }
    let mut order: Vec<&String> = docs.iter().collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tests = vec![BTreeSet::new(); k];
    for (i, d) in order.into_iter().enumerate() {
        tests[i % k].insert(d.clone());
    }
    let folds = tests
        .into_iter()
        .map(|test| Fold {
            train: docs.difference(&test).cloned().collect(),
            test,
        })
        .collect();
    Ok(FoldPlan { folds })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const FIGURE_SENTENCE: &str = "\
D1\tS1\t0\tARFTS\tNN\tB-NP\tPROT\t2\tnsubj
D1\tS1\t1\tspecifically\tRB\tB-ADVP\tO\t2\tadvmod
D1\tS1\t2\tbinds\tVBZ\tB-VP\tO\tROOT\tROOT
D1\tS1\t3\tto\tTO\tB-PP\tO\t2\tprep
D1\tS1\t4\ta\tDT\tB-NP\tO\t6\tdet
D1\tS1\t5\tdistinct\tJJ\tI-NP\tO\t6\tamod
D1\tS1\t6\tdomain\tNN\tI-NP\tO\t2\tnmod
D1\tS1\t7\tin\tIN\tB-PP\tO\t6\tprep
D1\tS1\t8\tXIAP-BIR3\tNN\tB-NP\tPROT\t6\tnmod
";

    fn sentence_with_mentions(n: usize) -> AnnotatedSentence {
        let mut tokens = Vec::new();
        for i in 0..(2 * n + 1) {
            tokens.push(AnnotatedToken {
                surface: format!("w{}", i),
                pos: "NN".into(),
                chunk: "O".into(),
                entity_role: if i % 2 == 1 {
                    EntityRole::Prot
                } else {
                    EntityRole::O
                },
                head: if i == 0 { Head::Root } else { Head::Token(0) },
                dep_label: if i == 0 { "ROOT".into() } else { "dep".into() },
            });
        }
        AnnotatedSentence {
            doc_id: "D".into(),
            sent_id: "S".into(),
            tokens,
        }
    }

    #[test]
    fn loads_figure_sentence() {
        let sentences = parse_corpus(FIGURE_SENTENCE).unwrap();
        assert_eq!(sentences.len(), 1);
        assert_eq!(sentences[0].tokens.len(), 9);
        assert_eq!(sentences[0].tokens[0].dep_label, "nsubj");
        assert_eq!(sentences[0].tokens[2].dep_label, "ROOT");
        assert_eq!(sentences[0].tokens[2].head, Head::Root);
    }

    #[test]
    fn empty_file_is_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
        assert!(parse_corpus("\n\n").unwrap().is_empty());
    }

    #[test]
    fn out_of_range_head_names_sentence() {
        let bad = FIGURE_SENTENCE.replace(
            "D1\tS1\t4\ta\tDT\tB-NP\tO\t6\tdet",
            "D1\tS1\t4\ta\tDT\tB-NP\tO\t12\tdet",
        );
        match parse_corpus(&bad) {
            Err(Error::Structure { sent_id, .. }) => assert_eq!(sent_id, "S1"),
            other => panic!("expected structural error, got {:?}", other),
        }
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let bad = FIGURE_SENTENCE.replace("D1\tS1\t3\tto\tTO", "D1\tS1\t3\tto");
        match parse_corpus(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {:?}", other),
        }
    }

    #[test]
    fn rejects_self_loops_and_missing_root() {
        let self_loop = FIGURE_SENTENCE.replace("O\t6\tdet", "O\t4\tdet");
        assert!(matches!(
            parse_corpus(&self_loop),
            Err(Error::Structure { .. })
        ));
        let rootless = FIGURE_SENTENCE.replace("ROOT\tROOT", "1\tdep");
        assert!(matches!(
            parse_corpus(&rootless),
            Err(Error::Structure { .. })
        ));
    }

    #[test]
    fn instance_counts_follow_pair_formula() {
        for m in 0..6 {
            let s = sentence_with_mentions(m);
            assert_eq!(s.mentions().len(), m);
            assert_eq!(make_instances(&[s]).len(), m * m.saturating_sub(1) / 2);
        }
    }

    #[test]
    fn three_mentions_give_three_pairs_with_rewritten_roles() {
        let s = sentence_with_mentions(3);
        let inst = make_instances(&[s]);
        let pairs: Vec<_> = inst
            .iter()
            .map(|i| (i.prot1.start, i.prot2.start))
            .collect();
        assert_eq!(pairs, vec![(1, 3), (1, 5), (3, 5)]);
        let roles: Vec<_> = inst[1]
            .sentence
            .tokens
            .iter()
            .map(|t| t.entity_role)
            .collect();
        use EntityRole::*;
        assert_eq!(roles, vec![O, Prot1, O, Prot, O, Prot2, O]);
    }

    #[test]
    fn instance_file_drops_self_interactions() {
        let sentences = parse_corpus(FIGURE_SENTENCE).unwrap();
        let text = "a\tD1\tS1\t0\t0\t8\t8\tPPI\t1\nb\tD1\tS1\t0\t0\t0\t0\tOTHER\n";
        let inst = parse_instances(text, &sentences).unwrap();
        assert_eq!(inst.len(), 1);
        assert!(inst[0].difficult);
        assert_eq!(inst[0].sentence.tokens[8].entity_role, EntityRole::Prot2);
        assert!(parse_instances("a\tD1\tS1\t0\t0\t8\t9\tPPI\n", &sentences).is_err());
        assert!(parse_instances("a\tD1\tS9\t0\t0\t8\t8\tPPI\n", &sentences).is_err());
    }

    #[test]
    fn distances_measure_to_nearest_span_token() {
        let span = Span::new(3, 5);
        assert_eq!(span.distance_from(0), -3);
        assert_eq!(span.distance_from(4), 0);
        assert_eq!(span.distance_from(8), 3);
    }

    fn docs(n: usize) -> BTreeSet<String> {
        (0..n).map(|i| format!("doc{:02}", i)).collect()
    }

    #[test]
    fn ten_docs_ten_folds_one_doc_each() {
        let plan = split_docs(&docs(10), 10, 99).unwrap();
        assert!(plan
            .folds
            .iter()
            .all(|f| f.test.len() == 1 && f.train.len() == 9));
        plan.validate(&docs(10)).unwrap();
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        assert_eq!(
            split_docs(&docs(23), 10, 5).unwrap(),
            split_docs(&docs(23), 10, 5).unwrap()
        );
        assert_ne!(
            split_docs(&docs(23), 10, 5).unwrap(),
            split_docs(&docs(23), 10, 6).unwrap()
        );
    }

    #[test]
    fn too_few_docs_is_config_error() {
        assert!(matches!(split_docs(&docs(3), 4, 0), Err(Error::Config(_))));
        assert!(matches!(split_docs(&docs(3), 1, 0), Err(Error::Config(_))));
    }

    #[test]
    fn fold_plan_file_round_trips_and_validates() {
        let plan = split_docs(&docs(7), 3, 1).unwrap();
        let back = FoldPlan::parse(&plan.to_tsv()).unwrap();
        assert_eq!(plan, back);
        let mut broken = back.clone();
        let moved = broken.folds[0].test.iter().next().unwrap().clone();
        broken.folds[1].test.insert(moved);
        assert!(broken.validate(&docs(7)).is_err());
    }
}
