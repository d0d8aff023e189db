//! Encodes the "ARFTS specifically binds to a distinct domain in XIAP-BIR3"
//! sentence and shows both channels.
//!
//! cargo run --example encode_sentence

use mcdepcnn::corpus::{load_corpus, Label, PpiInstance, Span};
use mcdepcnn::encode::{
    encode_instance, head_of, EmbeddingTable, FeatureSchema, HeadToken, CHUNK_OFFSET, DEP_OFFSET,
    ENTITY_OFFSET, POSITION_OFFSET, POS_GROUPS, POS_OFFSET,
};

fn ones(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x == 1.0)
        .map(|(i, _)| i)
        .collect()
}

fn main() -> Result<(), mcdepcnn::Error> {
    let sentences = load_corpus(concat!(env!("CARGO_MANIFEST_DIR"), "/data/toy/corpus.tsv"))?;
    let sentence = &sentences[0];
    let schema = FeatureSchema::from_sentences(&sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    let inst = PpiInstance::new(
        "figure",
        sentence,
        Span::new(0, 0),
        Span::new(8, 8),
        Label::Ppi,
    );
    let enc = encode_instance(&inst, &emb, &schema, 160);
    println!("valid_len {}  row width {}", enc.valid_len, enc.dim);

    let own = enc.channel(0, None);
    let heads = enc.channel(1, None);
    println!(
        "{:<14} {:<10} {:>3} {:>3}  {:<8} {:<7} {:<10} {:<10}",
        "token", "head", "d1", "d2", "pos", "chunk", "dep", "position bits"
    );
    for (i, tok) in inst.sentence.tokens.iter().enumerate() {
        let head = match head_of(i, &inst.sentence) {
            HeadToken::Token { token, .. } => token.surface.as_str(),
            HeadToken::Root => "ROOT",
        };
        let f = &own.row(i)[200..];
        let pos = ones(&f[POS_OFFSET..CHUNK_OFFSET])[0];
        let chunk = ones(&f[CHUNK_OFFSET..ENTITY_OFFSET])[0];
        let dep = ones(&f[DEP_OFFSET..POSITION_OFFSET])[0];
        println!(
            "{:<14} {:<10} {:>3} {:>3}  {:<8} {:<7} {:<10} {:?}",
            tok.surface,
            head,
            inst.prot1.distance_from(i),
            inst.prot2.distance_from(i),
            POS_GROUPS[pos],
            schema.chunk_vocab()[chunk],
            schema.dep_vocab()[dep],
            ones(&f[POSITION_OFFSET..]),
        );
    }

    let same_word = (0..enc.valid_len)
        .filter(|&i| heads.row(i)[..200] == own.row(2)[..200])
        .count();
    println!(
        "channel-2 rows carrying the vector of \"binds\": {}",
        same_word
    );
    Ok(())
}
