//! Loads word vectors in the word2vec text format and shows how unknown
//! words, case variants and the ROOT pseudo-token are resolved.
//!
//! cargo run --example word2vec_embeddings

use mcdepcnn::encode::EmbeddingTable;

fn main() -> Result<(), mcdepcnn::Error> {
    let text = "3 4\n\
                binds 0.1 0.2 0.3 0.4\n\
                domain -0.1 0.0 0.5 0.2\n\
                p53 0.9 -0.3 0.0 0.1\n";
    let table = EmbeddingTable::parse_word2vec(text, 4, 11)?;
    println!("{} words of dimension {}", table.len(), table.dim());
    for word in ["binds", "Binds", "domain", "MDM2"] {
        let row = table.lookup(word);
        println!(
            "{:<8} -> row {} ({})  {:?}",
            word,
            row,
            table.word(row),
            table.row(row)
        );
    }
    println!("ROOT     -> {:?}", table.root_vector());

    match EmbeddingTable::parse_word2vec(text, 200, 11) {
        Err(e) => println!("dimension check: {}", e),
        Ok(_) => println!("dimension check missed"),
    }
    Ok(())
}
