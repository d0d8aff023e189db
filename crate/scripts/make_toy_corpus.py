#!/usr/bin/env python3
"""Regenerates the bundled toy corpus under crates/core/data/toy/.

Each template is a list of units: (surface-or-slot, pos, chunk, head_unit, dep).
Slots P1/P2/P3 are protein mentions that expand to one or more tokens; the last
token of a mention carries the unit's head and label, earlier tokens attach to
it as `compound`. head_unit = -1 marks the root.
"""
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "data", "toy")

POSITIVE = [
    [("P1", "NN", "B-NP", 1, "nsubj"), ("binds", "VBZ", "B-VP", -1, "ROOT"),
     ("P2", "NN", "B-NP", 1, "dobj"), (".", ".", "O", 1, "punct")],
    [("P1", "NN", "B-NP", 1, "nsubj"), ("interacts", "VBZ", "B-VP", -1, "ROOT"),
     ("with", "IN", "B-PP", 3, "case"), ("P2", "NN", "B-NP", 1, "nmod"),
     (".", ".", "O", 1, "punct")],
    [("P1", "NN", "B-NP", 2, "nsubj"), ("directly", "RB", "B-ADVP", 2, "advmod"),
     ("activates", "VBZ", "B-VP", -1, "ROOT"), ("P2", "NN", "B-NP", 2, "dobj"),
     ("in", "IN", "B-PP", 5, "case"), ("vivo", "FW", "B-NP", 2, "nmod"),
     (".", ".", "O", 2, "punct")],
    [("P1", "NN", "B-NP", 1, "nsubj"), ("associates", "VBZ", "B-VP", -1, "ROOT"),
     ("with", "IN", "B-PP", 3, "case"), ("P2", "NN", "B-NP", 1, "nmod"),
     ("in", "IN", "B-PP", 6, "case"), ("the", "DT", "B-NP", 6, "det"),
     ("complex", "NN", "I-NP", 1, "nmod"), (".", ".", "O", 1, "punct")],
    [("Binding", "NN", "B-NP", 6, "nsubjpass"), ("of", "IN", "B-PP", 2, "case"),
     ("P1", "NN", "B-NP", 0, "nmod"), ("to", "TO", "B-PP", 4, "case"),
     ("P2", "NN", "B-NP", 0, "nmod"), ("was", "VBD", "B-VP", 6, "auxpass"),
     ("observed", "VBN", "I-VP", -1, "ROOT"), (".", ".", "O", 6, "punct")],
]

NEGATIVE = [
    [("P1", "NN", "B-NP", 5, "nsubjpass"), ("and", "CC", "O", 0, "cc"),
     ("P2", "NN", "B-NP", 0, "conj"), ("were", "VBD", "B-VP", 5, "auxpass"),
     ("separately", "RB", "B-ADVP", 5, "advmod"), ("measured", "VBN", "B-VP", -1, "ROOT"),
     (".", ".", "O", 5, "punct")],
    [("P1", "NN", "B-NP", 2, "nsubjpass"), ("was", "VBD", "B-VP", 2, "auxpass"),
     ("detected", "VBN", "I-VP", -1, "ROOT"), ("in", "IN", "B-PP", 4, "case"),
     ("serum", "NN", "B-NP", 2, "nmod"), (",", ",", "O", 2, "punct"),
     ("whereas", "IN", "B-SBAR", 9, "mark"), ("P2", "NN", "B-NP", 9, "nsubj"),
     ("was", "VBD", "B-VP", 9, "cop"), ("absent", "JJ", "B-ADJP", 2, "advcl"),
     (".", ".", "O", 2, "punct")],
    [("Expression", "NN", "B-NP", 5, "nsubj"), ("of", "IN", "B-PP", 2, "case"),
     ("P1", "NN", "B-NP", 0, "nmod"), ("did", "VBD", "B-VP", 5, "aux"),
     ("not", "RB", "I-VP", 5, "neg"), ("affect", "VB", "I-VP", -1, "ROOT"),
     ("P2", "NN", "B-NP", 7, "compound"), ("levels", "NNS", "I-NP", 5, "dobj"),
     (".", ".", "O", 5, "punct")],
    [("P1", "NN", "B-NP", 3, "nsubj"), ("is", "VBZ", "B-VP", 3, "cop"),
     ("a", "DT", "B-NP", 3, "det"), ("kinase", "NN", "I-NP", -1, "ROOT"),
     ("unlike", "IN", "B-PP", 5, "case"), ("P2", "NN", "B-NP", 3, "nmod"),
     (".", ".", "O", 3, "punct")],
]

# P1 binds P2 but not P3 .  -> (P1,P2) PPI, (P1,P3) OTHER, (P2,P3) OTHER
TRIPLE = [("P1", "NN", "B-NP", 1, "nsubj"), ("binds", "VBZ", "B-VP", -1, "ROOT"),
          ("P2", "NN", "B-NP", 1, "dobj"), ("but", "CC", "O", 2, "cc"),
          ("not", "RB", "B-NP", 5, "neg"), ("P3", "NN", "I-NP", 2, "conj"),
          (".", ".", "O", 1, "punct")]

# ARFTS specifically binds to a distinct domain in XIAP-BIR3
FIGURE = [("ARFTS", "NN", "B-NP", 2, "nsubj", "PROT"),
          ("specifically", "RB", "B-ADVP", 2, "advmod", "O"),
          ("binds", "VBZ", "B-VP", -1, "ROOT", "O"),
          ("to", "TO", "B-PP", 2, "prep", "O"),
          ("a", "DT", "B-NP", 6, "det", "O"),
          ("distinct", "JJ", "I-NP", 6, "amod", "O"),
          ("domain", "NN", "I-NP", 2, "nmod", "O"),
          ("in", "IN", "B-PP", 6, "prep", "O"),
          ("XIAP-BIR3", "NN", "B-NP", 6, "nmod", "PROT")]

PROTEINS = [
    ["IL-6"], ["gp130"], ["p53"], ["MDM2"], ["BRCA1"], ["RAD51"], ["Grb2"],
    ["SOS1"], ["actin"], ["myosin"], ["p47-phox"], ["cytochrome", "b558"],
    ["Ras"], ["Raf-1"], ["ERK2"], ["TRAF2"], ["CD40"], ["IL-6R", "alpha"],
    ["cyclin", "D1"], ["CDK4"], ["Bcl-2"], ["Bax"], ["p21rac"], ["p67-phox"],
]


def expand(template, fillers):
    tokens, unit_last = [], []
    for unit in template:
        surface = unit[0]
        if surface in fillers:
            start = len(tokens)
            words = fillers[surface]
            for j, w in enumerate(words):
                chunk = unit[2] if j == 0 else "I-NP"
                tokens.append([w, "NN", chunk, None, None, "PROT", surface])
            unit_last.append(len(tokens) - 1)
            for j in range(start, len(tokens) - 1):
                tokens[j][3] = ("tok", len(tokens) - 1)
                tokens[j][4] = "compound"
        else:
            tokens.append([surface, unit[1], unit[2], None, None, "O", None])
            unit_last.append(len(tokens) - 1)
    for unit, last in zip(template, unit_last):
        head = unit[3]
        tokens[last][3] = "ROOT" if head == -1 else unit_last[head]
        tokens[last][4] = unit[4]
    for t in tokens:
        if isinstance(t[3], tuple):
            t[3] = t[3][1]
    spans = {}
    for i, t in enumerate(tokens):
        if t[6]:
            s, e = spans.get(t[6], (i, i))
            spans[t[6]] = (min(s, i), max(e, i))
    return tokens, spans


def main():
    os.makedirs(OUT, exist_ok=True)
    sentences = []  # (doc, sent, tokens, [(p1span, p2span, label)])
    fig_tokens = [[s, p, c, "ROOT" if h == -1 else h, d, r, None]
                  for (s, p, c, h, d, r) in FIGURE]
    sentences.append(("D01", "D01.s0", fig_tokens, [((0, 0), (8, 8), "PPI")]))

    prot = iter(PROTEINS * 4)
    plan = []
    for i in range(13):
        plan.append(("pos", POSITIVE[i % len(POSITIVE)]))
        plan.append(("neg", NEGATIVE[i % len(NEGATIVE)]))
    docs = ["D%02d" % n for n in range(1, 13)]
    counter = {d: 1 for d in docs}
    for n, (kind, template) in enumerate(plan):
        fillers = {"P1": next(prot), "P2": next(prot)}
        tokens, spans = expand(template, fillers)
        label = "PPI" if kind == "pos" else "OTHER"
        doc = docs[(n + 1) % len(docs)]
        sid = "%s.s%d" % (doc, counter[doc])
        counter[doc] += 1
        sentences.append((doc, sid, tokens, [(spans["P1"], spans["P2"], label)]))
    fillers = {"P1": ["Grb2"], "P2": ["SOS1"], "P3": ["Ras"]}
    tokens, spans = expand(TRIPLE, fillers)
    doc = "D12"
    sid = "%s.s%d" % (doc, counter[doc])
    sentences.append((doc, sid, tokens, [
        (spans["P1"], spans["P2"], "PPI"),
        (spans["P1"], spans["P3"], "OTHER"),
        (spans["P2"], spans["P3"], "OTHER"),
    ]))
    sentences.sort(key=lambda s: (s[0], int(s[1].split(".s")[1])))

    with open(os.path.join(OUT, "corpus.tsv"), "w") as f:
        for doc, sid, tokens, _ in sentences:
            for i, t in enumerate(tokens):
                f.write("\t".join([doc, sid, str(i), t[0], t[1], t[2], t[5], str(t[3]), t[4]]) + "\n")
            f.write("\n")
    with open(os.path.join(OUT, "instances.tsv"), "w") as f:
        n = 0
        for doc, sid, tokens, pairs in sentences:
            for (a, b, label) in pairs:
                difficult = "1" if n % 6 == 5 else "0"
                f.write("\t".join(["I%02d" % n, doc, sid, str(a[0]), str(a[1]), str(b[0]), str(b[1]), label, difficult]) + "\n")
                n += 1


if __name__ == "__main__":
    main()
