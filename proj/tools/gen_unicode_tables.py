#!/usr/bin/env python3
"""Regenerates src/annotate/unicode_tables.inc (letter / number / whitespace ranges)."""
import sys
import unicodedata

WHITESPACE = [0x09, 0x0A, 0x0B, 0x0C, 0x0D, 0x20, 0x85, 0xA0, 0x1680, *range(0x2000, 0x200B),
              0x2028, 0x2029, 0x202F, 0x205F, 0x3000]


def ranges(pred):
    out, start = [], None
    for cp in range(0x110000):
        hit = pred(cp)
        if hit and start is None:
            start = cp
        elif not hit and start is not None:
            out.append((start, cp - 1))
            start = None
    if start is not None:
        out.append((start, 0x10FFFF))
    return out


def emit(name, rs):
    body = ",\n".join(f"    {{0x{a:X}, 0x{b:X}}}" for a, b in rs)
    return f"constexpr CodeRange {name}[] = {{\n{body}\n}};\n"


def main(path):
    cat = lambda cp: unicodedata.category(chr(cp))
    ws = set(WHITESPACE)
    text = [f"// Generated by tools/gen_unicode_tables.py (Unicode {unicodedata.unidata_version}).\n"]
    text.append(emit("kLetters", ranges(lambda cp: cat(cp).startswith("L"))))
    text.append(emit("kNumbers", ranges(lambda cp: cat(cp).startswith("N"))))
    text.append(emit("kWhitespace", ranges(lambda cp: cp in ws)))
    with open(path, "w") as f:
        f.write("\n".join(text))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/annotate/unicode_tables.inc")
