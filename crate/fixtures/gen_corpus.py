"""Regenerates the mixed corpus tree, its tagged twin, and the labeled phrases.

Output is deterministic. Run from this directory:  python3 gen_corpus.py
"""
import os
import random

rng = random.Random(2024)

SUBJ_M = [("On", "Pp3msn"), ("Marko", "Npmsn"), ("Petar", "Npmsn"), ("Deda", "Ncmsn"), ("Komšija", "Ncmsn")]
SUBJ_F = [("Ona", "Pp3fsn"), ("Jelena", "Npfsn"), ("Ana", "Npfsn"), ("Baka", "Ncfsn")]

# verb simile: (verb, noun) pairs read as figurative
VERB_SIMILE = [
    ("radi", "konj"), ("spava", "beba"), ("jede", "vuk"), ("peva", "slavuj"), ("pliva", "riba"),
    ("trči", "zec"), ("viče", "magarac"), ("skače", "jarac"), ("puši", "lokomotiva"), ("ćuti", "zid"),
]
# adjective similes, masculine/feminine forms
ADJ_SIMILE = [
    (("gladan", "gladna"), "vuk"), (("lep", "lepa"), "cvet"), (("beo", "bela"), "sneg"),
    (("hladan", "hladna"), "led"), (("tvrd", "tvrda"), "kamen"), (("bled", "bleda"), "krpa"),
    (("crven", "crvena"), "rak"), (("vredan", "vredna"), "mrav"), (("lukav", "lukava"), "lisica"),
    (("spor", "spora"), "puž"),
]
# literal comparisons: verb + role noun
LITERAL = [
    ("radi", "pravnik"), ("radi", "lekar"), ("radi", "učitelj"), ("radi", "konobar"), ("radi", "vozač"),
    ("radi", "inženjer"), ("radi", "novinar"), ("radi", "kuvar"), ("dolazi", "gost"), ("igra", "golman"),
    ("služi", "vojnik"), ("živi", "podstanar"), ("putuje", "turista"), ("predaje", "profesor"),
]
VERB_TAG = "Vmr3s"
NOUN_TAGS = {"krpa": "Ncfsn", "riba": "Ncfsn", "beba": "Ncfsn", "lisica": "Ncfsn", "lokomotiva": "Ncfsn",
             "turista": "Ncmsn"}
TAILS = [
    [], [], [("u", "Sl"), ("Beogradu", "Npmsl")], [("već", "Rgp"), ("deset", "Mlc"), ("godina", "Ncfpg")],
    [("svaki", "Agpmsay"), ("dan", "Ncmsa")], [("u", "Sl"), ("Novom", "Agpmsly"), ("Sadu", "Npmsl")],
]
FILLER = [
    [("Danas", "Rgp"), ("pada", VERB_TAG), ("kiša", "Ncfsn")],
    [("Autobus", "Ncmsn"), ("kasni", VERB_TAG), ("pola", "Ncnsn"), ("sata", "Ncmsg")],
    [("Prodavnica", "Ncfsn"), ("radi", VERB_TAG), ("do", "Sg"), ("osam", "Mlc")],
    [("Sutra", "Rgp"), ("počinje", VERB_TAG), ("škola", "Ncfsn")],
    [("Grad", "Ncmsn"), ("je", "Va-r3s"), ("miran", "Agpmsnn"), ("noću", "Rgp")],
    [("Vesti", "Ncfpn"), ("su", "Va-r3p"), ("stigle", "Vmp-pf"), ("kasno", "Rgp")],
    [("Reka", "Ncfsn"), ("teče", VERB_TAG), ("polako", "Rgp")],
    [("Film", "Ncmsn"), ("traje", VERB_TAG), ("dva", "Mlc"), ("sata", "Ncmsg")],
]
CONNECTORS = ["kao"] * 8 + ["ko", "k'o"]


def noun_tag(n):
    return NOUN_TAGS.get(n, "Ncmsn")


def sentence(kind):
    conn = (rng.choice(CONNECTORS), "Cs")
    if kind == "filler":
        return list(rng.choice(FILLER)), None
    if kind == "verb":
        v, n = rng.choice(VERB_SIMILE)
        subj = rng.choice(SUBJ_M + SUBJ_F)
        toks = [subj, (v, VERB_TAG), conn, (n, noun_tag(n))] + rng.choice(TAILS)
        return toks, (f"{v} kao {n}", 1)
    if kind == "adj":
        (m, f), n = rng.choice(ADJ_SIMILE)
        if rng.random() < 0.5:
            subj, a, atag = rng.choice(SUBJ_M), m, "Agpmsnn"
        else:
            subj, a, atag = rng.choice(SUBJ_F), f, "Agpfsnn"
        toks = [subj, ("je", "Va-r3s"), (a, atag), conn, (n, noun_tag(n))]
        return toks, (f"{a} kao {n}", 1)
    v, n = rng.choice(LITERAL)
    subj = rng.choice(SUBJ_M + SUBJ_F)
    toks = [subj, (v, VERB_TAG), conn, (n, noun_tag(n))] + rng.choice(TAILS)
    return toks, (f"{v} kao {n}", 0)


def capitalize(toks):
    w, t = toks[0]
    return [(w[0].upper() + w[1:], t)] + toks[1:]


kinds = ["literal"] * 110 + ["verb"] * 25 + ["adj"] * 25 + ["filler"] * 40
rng.shuffle(kinds)
sentences = [sentence(k) for k in kinds]

SOURCES = ["blog", "forum", "library", "publisher"]
per_file = 10
root = "corpus"
tagged = []
for i in range(0, len(sentences), per_file):
    chunk = sentences[i:i + per_file]
    src = SOURCES[(i // per_file) % len(SOURCES)]
    os.makedirs(os.path.join(root, src), exist_ok=True)
    lines = []
    for toks, _ in chunk:
        toks = capitalize(toks) + [(".", "Z")]
        tagged.append(toks)
        lines.append(" ".join(w for w, _ in toks[:-1]) + ".")
    with open(os.path.join(root, src, f"doc{i // per_file:02d}.txt"), "w") as f:
        f.write(" ".join(lines) + "\n")

with open("tagger_train.tsv", "w") as f:
    f.write("# Tagged training sentences: word<TAB>tag, blank line between sentences.\n")
    for toks in tagged:
        for w, t in toks:
            f.write(f"{w}\t{t}\n")
        f.write("\n")

# Gold sentences are part of the tagger training data.
with open("gold.tsv") as g, open("tagger_train.tsv", "a") as f:
    for line in g:
        if line.startswith("#") or line.startswith(">"):
            continue
        f.write(line if line.strip() else "\n")
    f.write("\n")

phrases = sorted({p for _, p in sentences if p})
with open("labeled_phrases.tsv", "w") as f:
    f.write("# label<TAB>phrase; 1 = simile, 0 = literal comparison\n")
    for text, label in phrases:
        f.write(f"{label}\t{text}\n")

print(len(sentences), "sentences,", len(phrases), "labeled phrases")
