mod common;

use mcdepcnn::corpus::{EntityRole, Span};
use mcdepcnn::encode::{
    encode_chunk, encode_dep, encode_entity, encode_instance, encode_pos, encode_position,
    token_vector, EmbeddingTable, FeatureSchema, CHUNK_OFFSET, DEP_OFFSET, ENTITY_OFFSET,
    POSITION_HALF, POSITION_OFFSET, POS_OFFSET,
};
use proptest::prelude::*;

fn bins_oracle(m: u64) -> usize {
    match m {
        0..=4 => m as usize,
        5..=8 => 5,
        9..=16 => 6,
        17..=32 => 7,
        _ => 8,
    }
}

fn ones(v: &[f64]) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, &x)| x == 1.0)
        .map(|(i, _)| i)
        .collect()
}

fn is_binary(v: &[f64]) -> bool {
    v.iter().all(|&x| x == 0.0 || x == 1.0)
}

#[test]
fn position_scan_over_two_hundred() {
    let schema = FeatureSchema::from_sentences(&[]);
    for d1 in -200i64..=200 {
        for d2 in [-200i64, -33, -7, -1, 0, 1, 9, 32, 200] {
            let v = encode_position(d1, d2, &schema);
            assert_eq!(v.len(), 2 * POSITION_HALF);
            assert!(is_binary(&v));
            for (half, d) in [(0, d1), (1, d2)] {
                let h = &v[half * POSITION_HALF..(half + 1) * POSITION_HALF];
                assert_eq!(h[0] == 1.0, d < 0, "sign of {}", d);
                assert_eq!(
                    ones(&h[1..]),
                    vec![bins_oracle(d.unsigned_abs())],
                    "bin of {}",
                    d
                );
            }
        }
    }
}

#[test]
fn binds_distances() {
    let schema = FeatureSchema::from_sentences(&[]);
    let v = encode_position(2, -6, &schema);
    assert_eq!(ones(&v), vec![3, 10, 16]);
}

proptest! {
    #[test]
    fn sign_flip_only_moves_sign_bits(a in 1i64..300, b in 1i64..300) {
        let schema = FeatureSchema::from_sentences(&[]);
        let pos = encode_position(a, b, &schema);
        let neg = encode_position(-a, -b, &schema);
        let diff: Vec<usize> = (0..pos.len()).filter(|&i| pos[i] != neg[i]).collect();
        prop_assert_eq!(diff, vec![0, POSITION_HALF]);
    }

    #[test]
    fn categorical_encoders_are_one_hot(pos in "[A-Z$]{1,4}", chunk in "[BIO]-[A-Z]{2,4}", dep in "[a-z:]{1,10}") {
        let (sentences, _) = common::toy_corpus();
        let schema = FeatureSchema::from_sentences(&sentences);
        for v in [encode_pos(&pos, &schema), encode_chunk(&chunk, &schema), encode_dep(&dep, &schema)] {
            prop_assert!(is_binary(&v));
            prop_assert_eq!(ones(&v).len(), 1);
        }
    }
}

#[test]
fn every_toy_token_vector_has_exact_slices() {
    let (sentences, instances) = common::toy_corpus();
    let schema = FeatureSchema::from_sentences(&sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    for inst in &instances {
        for (i, tok) in inst.sentence.tokens.iter().enumerate() {
            let d1 = inst.prot1.distance_from(i);
            let d2 = inst.prot2.distance_from(i);
            let v = token_vector(tok, d1, d2, &emb, &schema);
            assert_eq!(v.len(), 351);
            assert_eq!(&v[..200], emb.vector(&tok.surface));
            let f = &v[200..];
            for (off, len) in [
                (POS_OFFSET, 8),
                (CHUNK_OFFSET, 18),
                (ENTITY_OFFSET, 4),
                (DEP_OFFSET, 101),
            ] {
                assert!(is_binary(&f[off..off + len]));
                assert_eq!(ones(&f[off..off + len]).len(), 1);
            }
            assert_eq!(
                &f[ENTITY_OFFSET..ENTITY_OFFSET + 4],
                encode_entity(tok.entity_role).as_slice()
            );
            assert_eq!(
                &f[POSITION_OFFSET..],
                encode_position(d1, d2, &schema).as_slice()
            );
        }
    }
}

#[test]
fn chunk_vocabulary_is_distinct() {
    let schema = FeatureSchema::from_sentences(&[]);
    let vocab = schema.chunk_vocab().to_vec();
    assert_eq!(vocab.len(), 18);
    let vectors: Vec<Vec<f64>> = vocab.iter().map(|t| encode_chunk(t, &schema)).collect();
    for i in 0..vectors.len() {
        for j in i + 1..vectors.len() {
            assert_ne!(vectors[i], vectors[j]);
        }
    }
}

#[test]
fn figure_head_channel() {
    let (sentences, _) = common::toy_corpus();
    let figure = &sentences[0];
    let surfaces: Vec<&str> = figure.tokens.iter().map(|t| t.surface.as_str()).collect();
    assert_eq!(
        surfaces,
        [
            "ARFTS",
            "specifically",
            "binds",
            "to",
            "a",
            "distinct",
            "domain",
            "in",
            "XIAP-BIR3"
        ]
    );
    // Heads written out by hand from the parse; None is ROOT.
    let heads: [Option<&str>; 9] = [
        Some("binds"),
        Some("binds"),
        None,
        Some("binds"),
        Some("domain"),
        Some("domain"),
        Some("binds"),
        Some("domain"),
        Some("domain"),
    ];

    let schema = FeatureSchema::from_sentences(&sentences);
    let emb = EmbeddingTable::random(&sentences, 200, 7);
    let inst = mcdepcnn::corpus::PpiInstance::new(
        "fig",
        figure,
        Span::new(0, 0),
        Span::new(8, 8),
        mcdepcnn::corpus::Label::Ppi,
    );
    let enc = encode_instance(&inst, &emb, &schema, 160);
    let own = enc.channel(0, None);
    let head = enc.channel(1, None);
    for (i, h) in heads.iter().enumerate() {
        let expected = match h {
            Some(w) => emb.vector(w),
            None => emb.root_vector(),
        };
        assert_eq!(&head.row(i)[..200], expected, "token {}", i);
        // Channel 2 keeps the child's own distances.
        assert_eq!(
            &head.row(i)[200 + POSITION_OFFSET..],
            &own.row(i)[200 + POSITION_OFFSET..]
        );
    }

    // Rows 0 and 1 both hold "binds", differing only in position bits.
    let binds_row = &own.row(2)[..200 + POSITION_OFFSET];
    assert_eq!(&head.row(0)[..200 + POSITION_OFFSET], binds_row);
    assert_eq!(&head.row(1)[..200 + POSITION_OFFSET], binds_row);
    assert_ne!(head.row(0), head.row(1));

    // The ROOT pseudo-token: POS OTHER, chunk O, entity O, dep ROOT.
    let root = &head.row(2)[200..];
    assert_eq!(ones(&root[POS_OFFSET..POS_OFFSET + 8]), vec![7]);
    assert_eq!(ones(&root[CHUNK_OFFSET..CHUNK_OFFSET + 18]), vec![0]);
    assert_eq!(
        &root[ENTITY_OFFSET..ENTITY_OFFSET + 4],
        encode_entity(EntityRole::O).as_slice()
    );
    assert_eq!(
        &root[DEP_OFFSET..DEP_OFFSET + 101],
        encode_dep("ROOT", &schema).as_slice()
    );

    // "binds" itself sits at d1 = 2, d2 = -6.
    assert_eq!(
        &own.row(2)[200 + POSITION_OFFSET..],
        encode_position(2, -6, &schema).as_slice()
    );
}

#[test]
fn head_channel_has_few_distinct_rows() {
    let set = common::toy_encoded();
    for inst in &set.instances {
        let heads = inst.word_rows(1).unwrap();
        let own = inst.word_rows(0).unwrap();
        let distinct_heads: std::collections::BTreeSet<_> = heads.iter().collect();
        assert!(distinct_heads.len() <= own.len() + 1);
    }
}

#[test]
fn encoding_is_deterministic() {
    assert_eq!(common::toy_encoded(), common::toy_encoded());
}
