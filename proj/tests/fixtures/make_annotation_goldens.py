#!/usr/bin/env python3
"""Pins annotation goldens for the join fixture trio.

Independent of the C++ code: a small nested-loop join plus a direct rendering
of the template wording. Writes tests/fixtures/annotate/goldens.jsonl.
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
JOIN = os.path.join(HERE, "join")
OUT = os.path.join(HERE, "annotate", "goldens.jsonl")

CHROMS = [str(i) for i in range(1, 23)] + ["X", "Y", "MT"]
REGION = {
    "exonic": "an exonic region",
    "splicing": "a splice site region",
    "exonic;splicing": "an exonic splice site region",
    "ncRNA_exonic": "a non-coding RNA exon",
    "ncRNA_intronic": "a non-coding RNA intron",
    "ncRNA_splicing": "a non-coding RNA splice site",
    "ncRNA_exonic;splicing": "a non-coding RNA exonic splice site",
    "UTR5": "the 5' untranslated region",
    "UTR3": "the 3' untranslated region",
    "UTR5;UTR3": "the 5' and 3' untranslated regions",
    "intronic": "an intronic region",
    "upstream": "the upstream region",
    "downstream": "the downstream region",
    "upstream;downstream": "the upstream and downstream regions",
    "intergenic": "an intergenic region",
}
SIGNIFICANCE = [
    "Pathogenic", "Pathogenic/Likely pathogenic", "Likely pathogenic", "Uncertain significance",
    "Conflicting interpretations of pathogenicity", "Likely benign", "Benign/Likely benign", "Benign",
    "drug response", "risk factor", "association", "protective", "affects", "other", "not provided",
]


def fold(s):
    return s.replace("_", " ").lower()


def read_table(name):
    with open(os.path.join(JOIN, name)) as f:
        lines = [l.rstrip("\n") for l in f if l.strip()]
    header = lines[0].lstrip("#").split("\t")
    return [dict(zip(header, l.split("\t"))) for l in lines[1:] if not l.startswith("#")]


def val(x):
    x = (x or "").strip()
    return None if x in ("", ".") else x


def rsid_of(x):
    x = val(x)
    if x is None:
        return None
    if x.isdigit() and x[0] != "0":
        return "rs" + x
    return x


def load_tiers():
    tiers = {}
    with open(os.path.join(HERE, "..", "..", "data", "clinvar_review_tiers.tsv")) as f:
        for line in f:
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            status, tier = line.rsplit("\t", 1)
            tiers[" ".join(fold(status).split())] = int(tier)
    return tiers


def main():
    favor = {}
    for r in read_table("favor.tsv"):
        for alt in r["alt_vcf"].split(","):
            key = (r["chromosome"], int(r["position"]), r["ref_vcf"].upper(), alt.strip().upper())
            favor[key] = {
                "rsid": rsid_of(r["rsid"]),
                "cat": r["genecode_comprehensive_category"],
                "gene": val(r["genecode_comprehensive_info"]),
                "metasvm": val(r["metasvm_pred"]),
                "cadd": val(r["cadd_phred"]),
                "cage": val(r["cage_promoter"]),
                "genehancer": val(r["genehancer"]),
                "rdhs": val(r["rdhs"]),
                "clinvar": [],
                "gwas": [],
                "flipped": False,
            }

    def match(key):
        if key in favor:
            return key, False
        flipped = (key[0], key[1], key[3], key[2])
        if flipped in favor:
            return flipped, True
        return None, False

    tiers = load_tiers()
    for r in read_table("clinvar.tsv"):
        sig = next(s for s in SIGNIFICANCE if fold(s) == fold(r["CLNSIG"]))
        conds = [c.strip() for c in (val(r["CLNDN"]) or "").split("|") if c.strip() not in ("", ".")]
        desc = " ".join(fold(r["CLNREVSTAT"]).split())
        for alt in r["ALT"].split(","):
            key = (r["CHROM"], int(r["POS"]), r["REF"].upper(), alt.strip().upper())
            hit, flipped = match(key)
            if hit:
                favor[hit]["clinvar"].append((tiers[desc], sig, conds, desc))
                favor[hit]["flipped"] |= flipped

    for r in read_table("gwas.tsv"):
        p = val(r["P-VALUE"])
        assoc = (r["DISEASE/TRAIT"].strip(), float(p) if p else None, val(r["STUDY ACCESSION"]))
        if val(r["CHR_ID"]):
            for alt in r["ALT"].split(","):
                key = (r["CHR_ID"], int(r["CHR_POS"]), r["REF"].upper(), alt.strip().upper())
                hit, flipped = match(key)
                if hit:
                    favor[hit]["gwas"].append(assoc)
                    favor[hit]["flipped"] |= flipped
        else:
            rs = rsid_of(r["SNPS"])
            for key, rec in favor.items():
                if rs is not None and rec["rsid"] == rs:
                    rec["gwas"].append(assoc)

    def render(key, rec, omit_missing=True):
        chrom, pos, ref, alt = key
        vid = f"{chrom}-{pos}-{ref}-{alt}"
        if len(ref) == 1 and len(alt) == 1:
            vtype = "single nucleotide variant"
        elif len(ref) == len(alt):
            vtype = "multi-nucleotide variant"
        else:
            vtype = "deletion" if len(ref) > len(alt) else "insertion"
        out = []
        s = f"Variant {vid}"
        if rec["rsid"]:
            s += f" ({rec['rsid']})"
        out.append(s + f" is {'an' if vtype == 'insertion' else 'a'} {vtype} on chromosome {chrom} at position {pos} (GRCh38) "
                       f"with reference allele {ref} and alternate allele {alt}.")
        s = "According to GENCODE it lies in " + REGION[rec["cat"]]
        if rec["cat"] == "intergenic":
            if rec["gene"]:
                s += " near the gene " + rec["gene"]
            elif not omit_missing:
                s += "; the nearby gene is not available"
        else:
            s += " of the gene " + rec["gene"]
        out.append(s + ".")
        if rec["metasvm"]:
            out.append("The MetaSVM prediction is " + ("deleterious" if rec["metasvm"] == "D" else "tolerated") + ".")
        elif not omit_missing:
            out.append("The MetaSVM prediction is not available.")
        if rec["cadd"]:
            out.append("The CADD Phred score is %.1f." % float(rec["cadd"]))
        elif not omit_missing:
            out.append("The CADD Phred score is not available.")
        for field, present, missing in (
            ("cage", "It overlaps the CAGE promoter ", "CAGE promoter overlap is not available."),
            ("rdhs", "It overlaps the ENCODE rDHS element ", "rDHS overlap is not available."),
            ("genehancer", "GeneHancer links it to ", "GeneHancer annotation is not available."),
        ):
            if rec[field]:
                out.append(present + rec[field] + ".")
            elif not omit_missing:
                out.append(missing)

        def capped(items, cap=5):
            shown = ", ".join(items[:cap])
            return shown + (f" and {len(items) - cap} more" if len(items) > cap else "")

        clin = sorted(rec["clinvar"], key=lambda c: (-c[0], c[1], c[2], c[3]))
        if not clin and not omit_missing:
            out.append("ClinVar clinical significance is not available.")
        for tier, sig, conds, desc in clin:
            s = "ClinVar reports it as " + sig.lower()
            if conds:
                s += " for " + capped([c.replace("_", " ") for c in conds])
            out.append(s + f" (review status: {desc}, {tier} of 4 stars).")
        gw = sorted(rec["gwas"], key=lambda g: (g[0], g[1] is None, g[1] or 0.0, g[2] is None, g[2] or ""))
        dedup = []
        for g in gw:
            if not dedup or dedup[-1][0] != g[0]:
                dedup.append(g)
        if dedup:
            traits = [t + (" (p = %.1e)" % p if p is not None else "") for t, p, _ in dedup]
            out.append("GWAS studies associate it with " + capped(traits) + ".")
        elif not omit_missing:
            out.append("GWAS associations are not available.")
        return " ".join(out)

    def order(k):
        return (CHROMS.index(k[0]), k[1], k[2], k[3])

    keys = sorted(favor, key=order)
    picks = []
    predicates = [
        lambda k, r: len(r["clinvar"]) >= 2,
        lambda k, r: r["clinvar"] and r["flipped"],
        lambda k, r: r["clinvar"] and not r["flipped"],
        lambda k, r: any(len(c[2]) > 5 for c in r["clinvar"]),
        lambda k, r: any(not c[2] for c in r["clinvar"]),
        lambda k, r: len(r["gwas"]) >= 2,
        lambda k, r: r["gwas"] and r["flipped"],
        lambda k, r: r["gwas"] and r["rsid"] and not r["clinvar"],
        lambda k, r: r["clinvar"] and r["gwas"],
        lambda k, r: r["cat"] == "intergenic" and r["gene"],
        lambda k, r: r["cat"] == "intergenic" and not r["gene"],
        lambda k, r: len(k[2]) > len(k[3]),
        lambda k, r: len(k[2]) < len(k[3]),
        lambda k, r: len(k[2]) == len(k[3]) > 1,
        lambda k, r: r["rsid"] is None,
        lambda k, r: r["metasvm"] == "D",
        lambda k, r: r["cadd"] is None,
        lambda k, r: r["cage"] and r["rdhs"] and r["genehancer"],
        lambda k, r: k[0] == "MT",
        lambda k, r: k[0] == "X",
        lambda k, r: k[0] == "Y",
    ]
    for pred in predicates:
        for k in keys:
            if k not in picks and pred(k, favor[k]):
                picks.append(k)
                break
    step = max(1, len(keys) // 25)
    i = 0
    while len(picks) < 25:
        if keys[i] not in picks:
            picks.append(keys[i])
        i += step
    picks.sort(key=order)

    os.makedirs(os.path.dirname(OUT), exist_ok=True)
    with open(OUT, "w") as f:
        for k in picks:
            rec = favor[k]
            f.write(json.dumps({"key": "-".join(map(str, k)), "rsid": rec["rsid"], "omit_missing": True,
                                "text": render(k, rec)}) + "\n")
        for k in picks[:5]:
            rec = favor[k]
            f.write(json.dumps({"key": "-".join(map(str, k)), "rsid": rec["rsid"], "omit_missing": False,
                                "text": render(k, rec, omit_missing=False)}) + "\n")


if __name__ == "__main__":
    main()
