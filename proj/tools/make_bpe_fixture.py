#!/usr/bin/env python3
"""Builds the small BPE fixture vocabulary and its reference token counts.

The vocabulary is trained on a synthetic annotation-like corpus and written in
tiktoken's rank-file format. Reference counts come from tiktoken itself
(encode_ordinary with the cl100k split pattern), so the C++ tokenizer is
checked against an independent implementation.

usage: make_bpe_fixture.py <vocab_out> <sentences_out>
"""
import base64
import collections
import json
import random
import sys

import regex
import tiktoken

PAT = r"""'(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}++|\p{N}{1,3}+| ?[^\s\p{L}\p{N}]++[\r\n]*+|\s++$|\s*[\r\n]|\s+(?!\S)|\s"""

GENES = ["TCOF1", "BRCA1", "BRCA2", "TP53", "APOE", "CFTR", "LDLR", "PCSK9", "MYH7", "SCN5A",
         "KCNQ1", "FTO", "TCF7L2", "HLA-DRB1", "LINC00486", "MIR4432HG"]
TRAITS = ["type 2 diabetes", "body mass index", "height", "LDL cholesterol", "coronary artery disease",
          "schizophrenia", "asthma", "blood pressure", "Crohn's disease", "breast cancer"]
REGIONS = ["an exonic region", "an intronic region", "the 3' untranslated region", "an intergenic region",
           "the upstream region", "a splice site region", "a non-coding RNA exon"]
SIGS = ["pathogenic", "likely benign", "uncertain significance", "benign", "risk factor"]
FILLER = ("the of and to in is that for it as was with be by on not he this are or his from at which "
          "but have an they you were her she there had been one all we can their has more would "
          "will if no out so what up said about into than them only its some could new time people").split()


def synth_corpus(rng, n):
    lines = []
    for _ in range(n):
        chrom = rng.choice([str(c) for c in range(1, 23)] + ["X", "Y", "MT"])
        pos = rng.randrange(10_000, 250_000_000)
        ref, alt = rng.sample("ACGT", 2)
        s = (f"Variant {chrom}-{pos}-{ref}-{alt} (rs{rng.randrange(1, 10**9)}) is a single nucleotide "
             f"variant on chromosome {chrom} at position {pos} (GRCh38) with reference allele {ref} and "
             f"alternate allele {alt}. According to GENCODE it lies in {rng.choice(REGIONS)} of the gene "
             f"{rng.choice(GENES)}. The CADD Phred score is {rng.uniform(0, 45):.1f}.")
        if rng.random() < 0.3:
            s += f" ClinVar reports it as {rng.choice(SIGS)} for {rng.choice(TRAITS)}."
        if rng.random() < 0.3:
            s += f" GWAS studies associate it with {rng.choice(TRAITS)} (p = {rng.uniform(1, 9.9):.1f}e-{rng.randrange(8, 40):02d})."
        lines.append(s)
        lines.append(" ".join(rng.choice(FILLER) for _ in range(rng.randrange(5, 25))).capitalize() + ".")
    return "\n".join(lines)


def train(text, vocab_size):
    ranks = {bytes([i]): i for i in range(256)}
    counts = collections.Counter(regex.findall(PAT, text))
    words = [([bytes([b]) for b in w.encode("utf-8")], c) for w, c in counts.items()]
    while len(ranks) < vocab_size:
        stats = collections.Counter()
        for parts, c in words:
            for pair in zip(parts, parts[1:]):
                stats[pair] += c
        if not stats:
            break
        best = max(stats, key=lambda p: (stats[p], p))
        merged = best[0] + best[1]
        ranks[merged] = len(ranks)
        new_words = []
        for parts, c in words:
            out, i = [], 0
            while i < len(parts):
                if i + 1 < len(parts) and (parts[i], parts[i + 1]) == best:
                    out.append(merged)
                    i += 2
                else:
                    out.append(parts[i])
                    i += 1
            new_words.append((out, c))
        words = new_words
    return ranks


SENTENCES = [
    "Variant 5-148992859-C-A (rs1234567) is a single nucleotide variant on chromosome 5.",
    "C A",
    "don't DON'T we'll they've you're I'm she'd it's",
    "   leading spaces and trailing spaces   ",
    "multiple   internal    spaces",
    "line one\nline two\n\nline four",
    "windows\r\nline\r\nendings",
    "tabs\tand\t\tmixed \t whitespace",
    "numbers 1 12 123 1234 12345 1234567890",
    "p = 3.0e-12 and CADD 23.4",
    "naïve café résumé",
    "Größe straße Übermaß",
    "变异位于染色体五号",
    "emoji 🧬 and dna 🧪🧪",
    "α-helix β-sheet γ",
    "(parenthesized) [bracketed] {braced}",
    "punctuation!!! ??? ... ---",
    "mixed123letters456and789digits",
    "  \n  \n  ",
    "trailing newline\n",
    "ClinVar reports it as pathogenic for breast cancer (review status: reviewed by expert panel, 3 of 4 stars).",
    "GWAS studies associate it with height (p = 2.1e-09), body mass index (p = 4.5e-15) and 3 more.",
    "According to GENCODE it lies in the 3' untranslated region of the gene BRCA2.",
    "It overlaps the ENCODE rDHS element EH38E1234567.",
    "GeneHancer links it to GH05J148992 (score 12.3).",
    "'s 'S 'll 'LL 'Ve 're",
    "x'sy z'llw",
    "a b non-breaking",
    "　ideographic space",
    "١٢٣ arabic digits ٤٥٦٧",
    "Ⅻ roman numeral ½ fraction",
    "HLA-DRB1*15:01",
    "rs123456789; rs987654321",
    "chr1:12345-67890",
    "The MetaSVM prediction is deleterious.",
    "It is located in an intergenic region near the gene LINC00486.",
    "       ",
    "a",
    "!",
    "\n",
    "end with spaces and newline  \n",
    "                    wide gap",
    "userName camelCase snake_case kebab-case",
    "https://example.org/path?q=1&r=2",
    "e-mail@example.com",
    "3.14159 2.71828 1.41421",
    "Ιατρική γενετική",
    "Генетический вариант",
    "Mixed: ASCII, ελληνικά, русский, 中文, and 😀.",
    "The quick brown fox jumps over the lazy dog.",
]


def main(vocab_out, sentences_out):
    rng = random.Random(20240613)
    ranks = train(synth_corpus(rng, 1500), 1024)
    with open(vocab_out, "w") as f:
        for tok, rank in sorted(ranks.items(), key=lambda kv: kv[1]):
            f.write(base64.b64encode(tok).decode() + " " + str(rank) + "\n")
    enc = tiktoken.Encoding("fixture", pat_str=PAT, mergeable_ranks=ranks, special_tokens={})
    assert len(SENTENCES) == 50
    with open(sentences_out, "w") as f:
        for s in SENTENCES:
            ids = enc.encode_ordinary(s)
            f.write(json.dumps({"text": s, "count": len(ids), "tokens": ids}, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
