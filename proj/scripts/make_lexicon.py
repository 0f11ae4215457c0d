#!/usr/bin/env python3
"""Build data/default_lexicon.tsv from curated seed words.

Each seed word gets safe morphological variants (plural, -ed, -ing, -ly)
where the variant is still a sentiment-bearing English word. Polarities are
inherited from the seed, slightly damped for derived forms. Output is sorted
by token and deterministic.
"""

import os

# Seed polarities, hand-assigned on a [-1, 1] scale. Variant generation below
# only applies the suffix groups listed per entry, so irregular forms never
# produce junk tokens.
POSITIVE = [
    # (word, polarity, variant groups)
    ("amazing", 0.95, []),
    ("awesome", 0.9, []),
    ("excellent", 0.9, ["ly"]),
    ("fantastic", 0.9, []),
    ("perfect", 0.9, ["ly"]),
    ("outstanding", 0.85, ["ly"]),
    ("wonderful", 0.85, ["ly"]),
    ("superb", 0.85, ["ly"]),
    ("incredible", 0.85, []),
    ("phenomenal", 0.85, []),
    ("exceptional", 0.8, ["ly"]),
    ("magnificent", 0.8, ["ly"]),
    ("marvelous", 0.8, ["ly"]),
    ("brilliant", 0.8, ["ly"]),
    ("delicious", 0.8, ["ly"]),
    ("flawless", 0.8, ["ly"]),
    ("stellar", 0.75, []),
    ("terrific", 0.75, []),
    ("fabulous", 0.75, []),
    ("delightful", 0.75, ["ly"]),
    ("love", 0.75, ["d", "s"]),
    ("loves", 0.75, []),
    ("loved", 0.7, []),
    ("great", 0.7, ["ly"]),
    ("beautiful", 0.7, ["ly"]),
    ("gorgeous", 0.7, []),
    ("impressive", 0.7, ["ly"]),
    ("best", 0.7, []),
    ("favorite", 0.7, ["s"]),
    ("excited", 0.65, []),
    ("exciting", 0.65, []),
    ("tasty", 0.65, []),
    ("charming", 0.6, ["ly"]),
    ("enjoyable", 0.6, []),
    ("enjoyed", 0.6, []),
    ("recommend", 0.6, ["ed", "s"]),
    ("recommended", 0.6, []),
    ("satisfying", 0.6, []),
    ("satisfied", 0.6, []),
    ("happy", 0.6, []),
    ("happily", 0.55, []),
    ("glad", 0.55, []),
    ("fresh", 0.55, ["ly"]),
    ("friendly", 0.55, []),
    ("comfortable", 0.55, []),
    ("pleased", 0.55, []),
    ("pleasant", 0.55, ["ly"]),
    ("quality", 0.5, []),
    ("good", 0.5, []),
    ("nice", 0.5, ["ly"]),
    ("smooth", 0.5, ["ly"]),
    ("solid", 0.5, ["ly"]),
    ("sturdy", 0.5, []),
    ("reliable", 0.5, []),
    ("helpful", 0.5, ["ly"]),
    ("useful", 0.5, []),
    ("durable", 0.5, []),
    ("beautifully", 0.5, []),
    ("worth", 0.5, []),
    ("worthwhile", 0.5, []),
    ("crisp", 0.45, []),
    ("clean", 0.45, ["ly"]),
    ("bright", 0.45, ["ly"]),
    ("generous", 0.45, ["ly"]),
    ("convenient", 0.45, ["ly"]),
    ("effective", 0.45, ["ly"]),
    ("efficient", 0.45, ["ly"]),
    ("easy", 0.45, []),
    ("easily", 0.4, []),
    ("fast", 0.4, []),
    ("quick", 0.4, ["ly"]),
    ("affordable", 0.4, []),
    ("handy", 0.4, []),
    ("works", 0.4, []),
    ("worked", 0.35, []),
    ("fine", 0.3, []),
    ("decent", 0.3, ["ly"]),
    ("okay", 0.2, []),
    ("adequate", 0.2, ["ly"]),
    ("acceptable", 0.2, []),
    ("fair", 0.15, ["ly"]),
    ("average", 0.05, []),
]

NEGATIVE = [
    ("horrible", -0.95, ["ly"]),
    ("terrible", -0.95, []),
    ("terribly", -0.9, []),
    ("awful", -0.9, ["ly"]),
    ("disgusting", -0.9, ["ly"]),
    ("atrocious", -0.9, []),
    ("dreadful", -0.85, ["ly"]),
    ("abysmal", -0.85, []),
    ("appalling", -0.85, []),
    ("worst", -0.85, []),
    ("garbage", -0.8, []),
    ("trash", -0.8, []),
    ("hate", -0.8, ["d", "s"]),
    ("hated", -0.75, []),
    ("hates", -0.75, []),
    ("unusable", -0.75, []),
    ("worthless", -0.75, []),
    ("useless", -0.7, []),
    ("broken", -0.7, []),
    ("broke", -0.65, []),
    ("defective", -0.7, []),
    ("ruined", -0.7, []),
    ("nasty", -0.7, []),
    ("pathetic", -0.7, ["ly"]),
    ("disaster", -0.7, ["s"]),
    ("failure", -0.65, ["s"]),
    ("failed", -0.6, []),
    ("fails", -0.6, []),
    ("refund", -0.6, ["ed", "s"]),
    ("refunded", -0.55, []),
    ("returned", -0.5, []),
    ("returning", -0.5, []),
    ("disappointing", -0.65, ["ly"]),
    ("disappointed", -0.65, []),
    ("disappointment", -0.65, ["s"]),
    ("bad", -0.6, ["ly"]),
    ("poor", -0.6, ["ly"]),
    ("cheap", -0.5, ["ly"]),
    ("flimsy", -0.55, []),
    ("faulty", -0.55, []),
    ("stale", -0.55, []),
    ("rotten", -0.6, []),
    ("bland", -0.5, ["ly"]),
    ("tasteless", -0.55, []),
    ("gross", -0.6, ["ly"]),
    ("annoying", -0.55, ["ly"]),
    ("annoyed", -0.5, []),
    ("frustrating", -0.6, ["ly"]),
    ("frustrated", -0.55, []),
    ("angry", -0.6, []),
    ("upset", -0.55, []),
    ("regret", -0.55, ["s"]),
    ("regretted", -0.5, []),
    ("waste", -0.6, ["d", "s"]),
    ("wasted", -0.55, []),
    ("overpriced", -0.5, []),
    ("misleading", -0.55, ["ly"]),
    ("scam", -0.7, ["s"]),
    ("leaked", -0.5, []),
    ("leaking", -0.5, []),
    ("leaks", -0.45, []),
    ("cracked", -0.5, []),
    ("damaged", -0.55, []),
    ("damage", -0.5, ["s"]),
    ("smelly", -0.5, []),
    ("stinks", -0.55, []),
    ("stink", -0.5, ["s"]),
    ("slow", -0.4, ["ly"]),
    ("noisy", -0.4, []),
    ("weak", -0.4, ["ly"]),
    ("dull", -0.35, ["ly"]),
    ("boring", -0.4, ["ly"]),
    ("bored", -0.35, []),
    ("uncomfortable", -0.45, []),
    ("unreliable", -0.5, []),
    ("difficult", -0.35, []),
    ("hard", -0.2, ["ly"]),
    ("confusing", -0.35, ["ly"]),
    ("confused", -0.3, []),
    ("mediocre", -0.3, []),
    ("meh", -0.25, []),
    ("lacking", -0.3, []),
    ("lacks", -0.25, []),
    ("issue", -0.25, ["s"]),
    ("problem", -0.3, ["s"]),
    ("problems", -0.3, []),
    ("issues", -0.25, []),
    ("flaw", -0.3, ["s", "ed"]),
    ("flawed", -0.35, []),
]

# Negation markers are handled by the scorer itself and must never appear as
# lexicon entries.
FORBIDDEN = {"not", "no", "never", "n't"}

DAMPING = {"d": 0.0, "s": 0.0, "ed": 0.0, "ly": 0.05}


def variants(word, pol, groups):
    out = {word: pol}
    for g in groups:
        if g == "s":
            tok = word + ("es" if word.endswith(("s", "x", "sh", "ch")) else "s")
        elif g in ("d", "ed"):
            tok = word + g
        elif g == "ly":
            tok = word[:-1] + "ily" if word.endswith("y") else word + "ly"
        else:
            continue
        damped = pol - DAMPING[g] if pol > 0 else pol + DAMPING[g]
        out.setdefault(tok, round(damped, 4))
    return out


def main():
    entries = {}
    for word, pol, groups in POSITIVE + NEGATIVE:
        for tok, p in variants(word, pol, groups).items():
            if tok in FORBIDDEN:
                raise SystemExit(f"negation marker {tok!r} in seed list")
            if not (-1.0 <= p <= 1.0):
                raise SystemExit(f"polarity out of range for {tok!r}: {p}")
            # First assignment wins so hand-tuned explicit entries beat
            # derived variants of other seeds.
            entries.setdefault(tok, p)

    path = os.path.join(os.path.dirname(__file__), "..", "data", "default_lexicon.tsv")
    with open(path, "w") as f:
        f.write("# token<TAB>polarity, one entry per line\n")
        for tok in sorted(entries):
            f.write(f"{tok}\t{entries[tok]:g}\n")
    print(f"wrote {len(entries)} entries to {os.path.normpath(path)}")


if __name__ == "__main__":
    main()
